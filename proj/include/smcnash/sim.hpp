#pragma once

#include "smcnash/rng.hpp"
#include "smcnash/semantics.hpp"

#include <optional>
#include <string>
#include <vector>

namespace smcnash {

enum class Decision : std::uint8_t { Continue, Satisfied, Violated, Halt };

// Online observer driving a simulation: simulate() stops at the first
// non-Continue decision. When no component can ever act again (every delay
// is infinite), the simulator fast-forwards by divergence_horizon and runs a
// normal on_step over that interval; a finite horizon must make the observer
// reach a verdict, otherwise the run is truncated as idle.
struct StopCondition {
    virtual ~StopCondition() = default;
    virtual Decision on_initial(const Network&, const SystemState&) { return Decision::Continue; }
    virtual Decision on_step(const Network& net, const SystemState& pre, double delay,
                             const SystemState& post) = 0;
    virtual double divergence_horizon(const Network&, const SystemState&) { return kInf; }
};

struct RunStep {
    double delay = 0.0;
    std::optional<EdgeRef> fired; // nullopt: delay-only step
    SystemState post;             // state after delay and (optional) edge
};

struct Run {
    enum class Outcome : std::uint8_t { Satisfied, Violated, Halted, Truncated };

    SystemState initial;
    std::vector<RunStep> steps; // populated only when recording
    std::size_t n_steps = 0;
    Outcome outcome = Outcome::Truncated;
    std::string truncation_reason; // "step_cap" | "deadlock" | "idle"

    bool truncated() const { return outcome == Outcome::Truncated; }
};

struct SimOptions {
    std::size_t max_steps = 1'000'000;
    bool record = false;
};

struct RaceOutcome {
    enum class Kind : std::uint8_t { Step, Deadlock, Idle } kind = Kind::Step;
    double delay = 0.0;
    std::optional<EdgeRef> fired;
};

// The race-based stochastic semantics: every component samples its own delay
// (uniform over the enabled window under a bounded invariant, shifted
// exponential otherwise, zero when urgent), the minimum moves first, ties
// break uniformly at random. A winner with no enabled edge at its sampled
// delay yields a delay-only step and the race re-runs from the new state.
class Simulator {
public:
    explicit Simulator(const Network& net) : net_(net) {
        if (!net_.built()) throw ConfigError("network must be built before simulation");
    }

    const Network& network() const { return net_; }

    // One race round; mutates the state in place.
    RaceOutcome race_step(SystemState& s, RngStream& rng) {
        const auto& comps = net_.comps();
        delays_.resize(comps.size());

        double d_star = kInf;
        for (ComponentId ci = 0; ci < comps.size(); ++ci) {
            double d = sample_component_delay_impl(net_, s, ci, rng);
            delays_[ci] = d;
            d_star = std::min(d_star, d);
        }
        if (d_star == kInf) return {RaceOutcome::Kind::Idle, 0.0, std::nullopt};

        winners_.clear();
        for (ComponentId ci = 0; ci < comps.size(); ++ci)
            if (delays_[ci] == d_star) winners_.push_back(ci);

        ComponentId winner = winners_[winners_.size() == 1 ? 0 : rng.pick(winners_.size())];
        collect_enabled(s, winner, d_star);

        if (cand_.empty() && d_star == 0.0) {
            // A zero-delay winner that cannot move would loop the race on an
            // unchanged state. Re-picking until an able minimizer comes up is
            // distributionally the same as conditioning on able winners.
            able_.clear();
            for (ComponentId ci : winners_) {
                collect_enabled(s, ci, 0.0);
                if (!cand_.empty()) able_.push_back(ci);
            }
            if (able_.empty()) return {RaceOutcome::Kind::Deadlock, 0.0, std::nullopt};
            winner = able_[able_.size() == 1 ? 0 : rng.pick(able_.size())];
            collect_enabled(s, winner, 0.0);
        }

        s.elapsed += d_star;
        if (cand_.empty()) return {RaceOutcome::Kind::Step, d_star, std::nullopt};

        EdgeRef choice{winner, pick_weighted(rng)};
        fire_edge_inplace(net_, s, choice);
        return {RaceOutcome::Kind::Step, d_star, choice};
    }

    Run simulate(StopCondition& stop, RngStream& rng, const SimOptions& opt = {}) {
        Run run;
        SystemState s = initial_state(net_);
        run.initial = s;

        Decision d = stop.on_initial(net_, s);
        while (d == Decision::Continue) {
            if (run.n_steps >= opt.max_steps) {
                run.outcome = Run::Outcome::Truncated;
                run.truncation_reason = "step_cap";
                return run;
            }
            pre_ = s;
            RaceOutcome ro = race_step(s, rng);
            if (ro.kind == RaceOutcome::Kind::Deadlock) {
                run.outcome = Run::Outcome::Truncated;
                run.truncation_reason = "deadlock";
                return run;
            }
            if (ro.kind == RaceOutcome::Kind::Idle) {
                double h = stop.divergence_horizon(net_, s);
                if (!(h > 0.0) || h == kInf) {
                    run.outcome = Run::Outcome::Truncated;
                    run.truncation_reason = "idle";
                    return run;
                }
                s.elapsed += h; // delay-only step; every component abstains
                ++run.n_steps;
                if (opt.record) run.steps.push_back({h, std::nullopt, s});
                d = stop.on_step(net_, pre_, h, s);
                if (d == Decision::Continue) {
                    run.outcome = Run::Outcome::Truncated;
                    run.truncation_reason = "idle";
                    return run;
                }
                break;
            }
            ++run.n_steps;
            if (opt.record) run.steps.push_back({ro.delay, ro.fired, s});
            d = stop.on_step(net_, pre_, ro.delay, s);
        }
        run.outcome = d == Decision::Satisfied ? Run::Outcome::Satisfied
                    : d == Decision::Violated  ? Run::Outcome::Violated
                                               : Run::Outcome::Halted;
        return run;
    }

    // Delay distribution of one component in a state: exactly 0 when urgent;
    // uniform on [d_min, d_max] when the invariant bounds delay; d_min +
    // exponential(exp_rate) when unbounded; +inf when the component has no
    // act edge at all in this location and nothing forces it to move.
    static double sample_component_delay_impl(const Network& net, const SystemState& s,
                                              ComponentId ci, RngStream& rng) {
        const CompiledComponent& c = net.comps()[ci];
        const CompiledLocation& loc = c.locations[s.locations[ci]];
        if (loc.urgent) return 0.0;
        double d_max = component_max_delay(net, s, ci);
        if (loc.act_edges.empty() && d_max == kInf) return kInf;
        std::optional<double> d_min = earliest_enabled_delay(net, s, ci, d_max);
        if (d_max == kInf) return d_min.value_or(0.0) + rng.exponential(loc.exp_rate);
        return rng.uniform(d_min.value_or(0.0), d_max);
    }

private:
    void collect_enabled(const SystemState& s, ComponentId ci, double d) {
        cand_.clear();
        weights_.clear();
        const CompiledComponent& c = net_.comps()[ci];
        const CompiledLocation& loc = c.locations[s.locations[ci]];
        for (std::uint32_t ei : loc.act_edges) {
            if (edge_enabled_at(net_, s, c.edges[ei], d)) {
                cand_.push_back(ei);
                weights_.push_back(c.edges[ei].weight);
            }
        }
    }

    std::uint32_t pick_weighted(RngStream& rng) {
        if (cand_.size() == 1) return cand_[0];
        double total = 0.0;
        for (double w : weights_) total += w;
        if (total <= 0.0) return cand_[rng.pick(cand_.size())];
        double roll = rng.next_unit() * total;
        for (std::size_t i = 0; i < cand_.size(); ++i) {
            roll -= weights_[i];
            if (roll < 0.0) return cand_[i];
        }
        return cand_.back();
    }

    const Network& net_;
    std::vector<double> delays_;
    std::vector<ComponentId> winners_, able_;
    std::vector<std::uint32_t> cand_;
    std::vector<double> weights_;
    SystemState pre_;
};

// Spec-level entry points.

inline double sample_component_delay(const Network& net, const SystemState& s, ComponentId ci,
                                     RngStream& rng) {
    return Simulator::sample_component_delay_impl(net, s, ci, rng);
}

inline Run simulate(const Network& net, StopCondition& stop, RngStream& rng,
                    const SimOptions& opt = {}) {
    Simulator sim(net);
    return sim.simulate(stop, rng, opt);
}

// Stops after a fixed number of steps; handy for tests and bare dumps.
struct HaltAfterSteps : StopCondition {
    explicit HaltAfterSteps(std::size_t n) : remaining(n) {}
    std::size_t remaining;
    Decision on_initial(const Network&, const SystemState&) override {
        return remaining == 0 ? Decision::Halt : Decision::Continue;
    }
    Decision on_step(const Network&, const SystemState&, double, const SystemState&) override {
        return --remaining == 0 ? Decision::Halt : Decision::Continue;
    }
};

// Independent validator: replays a recorded run through the pure wta-core
// operations and compares every intermediate state. Returns diagnostics.
inline std::vector<std::string> replay_run(const Network& net, const Run& run) {
    std::vector<std::string> diags;
    SystemState s = run.initial;
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
        const RunStep& st = run.steps[i];
        double m = max_delay(net, s);
        if (st.delay > m + kTimeSlack) {
            diags.push_back("step " + std::to_string(i) + ": delay exceeds max_delay");
            return diags;
        }
        if (st.fired) {
            const CompiledEdge& e = net.comps()[st.fired->component].edges[st.fired->edge];
            if (e.channel != kNoId && e.dir == SyncDir::Receive) {
                diags.push_back("step " + std::to_string(i) + ": a receive edge was fired");
                return diags;
            }
            if (!edge_enabled_at(net, s, e, st.delay)) {
                diags.push_back("step " + std::to_string(i) + ": fired edge was not enabled");
                return diags;
            }
        }
        try {
            s = apply_delay(net, s, std::min(st.delay, m));
            if (st.fired) s = apply_edge(net, s, *st.fired);
        } catch (const Error& e) {
            diags.push_back("step " + std::to_string(i) + ": " + e.what());
            return diags;
        }
        if (!(s == st.post)) {
            diags.push_back("step " + std::to_string(i) + ": replayed state diverges");
            return diags;
        }
    }
    return diags;
}

} // namespace smcnash
