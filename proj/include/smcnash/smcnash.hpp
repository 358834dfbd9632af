#pragma once

// Statistical model checking of Nash equilibria in stochastic timed-automata
// protocol games: network-of-WTA semantics, race-based simulation, PWCTL
// monitoring, Monte-Carlo utility estimation, pruning candidate search and
// erf-based certification, plus the two bundled CSMA case studies.

#include "smcnash/certify.hpp"
#include "smcnash/estimate.hpp"
#include "smcnash/model.hpp"
#include "smcnash/model_io.hpp"
#include "smcnash/models.hpp"
#include "smcnash/pipeline.hpp"
#include "smcnash/pool.hpp"
#include "smcnash/pwctl.hpp"
#include "smcnash/rng.hpp"
#include "smcnash/search.hpp"
#include "smcnash/semantics.hpp"
#include "smcnash/sim.hpp"
