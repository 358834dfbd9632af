#pragma once

#include "smcnash/estimate.hpp"

#include <string>
#include <vector>

namespace smcnash {

// ---------------------------------------------------------------------------
// k-persistent unslotted Aloha CSMA/CD.
//
// Each node waits a uniform random offset, then runs a geometric slot
// process: every slot it transmits with probability TransmitProb, else waits
// one more slot. Nodes listen to their own signal: the busy broadcast fires
// whenever a transmission starts, a transmitting receiver aborts immediately
// and flags the collision, and the starting node checks the flag from an
// urgent location so both parties stop. The shared counter nt tracks how
// many stations are transmitting; per-node ns counts completed frames.
//
// Timing and traffic are reconstruction choices (the sources pin the goal
// bounds, not the durations) and the dominant source of quantitative
// deviation from the reference results:
//   - frame transmission time 1: the energy budget of 3 permits about three
//     transmission attempts;
//   - decisions happen after a wait uniform on [1, 2] (slot 2 with jitter
//     1): the jitter keeps stations unslotted and desynchronized, the
//     minimum wait of one frame time prevents degenerate instant-retry
//     spam, and the ~30 decision opportunities within the 50-unit deadline
//     make low transmit probabilities genuinely risky;
//   - each station carries a backlog of 4 frames and leaves the medium when
//     done; the goal concerns the first frame only. A finite backlog keeps
//     early contention real (the 5-node optimum sits well below the 2-node
//     one) while still rewarding patience against aggressive fields, which
//     is what rules out the all-out strategies.
// Flat-slot or saturated variants make the 2-node utility surface too flat
// to locate an equilibrium at the phase-1 sample sizes.
// ---------------------------------------------------------------------------

struct AlohaParams {
    double transmit_prob = 0.5;          // the swept strategy
    std::int64_t slot_len = 2;           // decision slot; the wait is uniform on [slot-jitter, slot]
    std::int64_t slot_jitter = 1;        // keeps stations mutually unsynchronized (unslotted)
    std::int64_t frame_tx_time = 1;
    std::int64_t initial_offset_max = 2; // one slot
    std::int64_t time_bound = 50;        // goal: first success within this many time units
    std::int64_t energy_bound = 3;       // with at most this much time spent transmitting
    std::int64_t frames_to_send = 4;     // per-station backlog; 0 = saturated (never stops)
};

inline Automaton build_aloha_node(const std::string& name, const AlohaParams& p) {
    if (!(p.transmit_prob > 0.0 && p.transmit_prob <= 1.0))
        throw DomainError("transmit_prob must lie in (0, 1]");
    if (p.slot_len <= 0 || p.frame_tx_time <= 0 || p.initial_offset_max <= 0 ||
        p.time_bound <= 0 || p.energy_bound <= 0 || p.frames_to_send < 0 ||
        p.slot_jitter < 0 || p.slot_jitter > p.slot_len)
        throw DomainError("Aloha parameters are out of range");

    Automaton a;
    a.name = name;
    a.clocks = {{"x"}, {"time"}, {"energy"}};
    a.vars = {{"ns", 0, 0, 1 << 20}};
    a.params["TransmitProb"] = p.transmit_prob;
    a.initial = "INITIAL";

    auto loc = [&](std::string n, std::optional<std::int64_t> x_bound, std::int64_t energy_rate,
                   bool urgent) {
        Location l;
        l.name = std::move(n);
        if (x_bound) l.invariant.push_back({"x", CmpOp::Le, *x_bound});
        l.rates["energy"] = energy_rate;
        l.urgent = urgent;
        a.locations.push_back(std::move(l));
    };
    loc("INITIAL", p.initial_offset_max, 0, false);
    loc("DECIDE", std::nullopt, 0, true);
    loc("CHECK", std::nullopt, 0, true);
    loc("WAIT", p.slot_len, 0, false);
    loc("TRANSMIT", p.frame_tx_time, 1, false);
    if (p.frames_to_send > 0) loc("DONE", std::nullopt, 0, false);

    auto edge = [&](std::string from, std::string to) -> Edge& {
        Edge e;
        e.source = std::move(from);
        e.target = std::move(to);
        a.edges.push_back(std::move(e));
        return a.edges.back();
    };

    { // random offset, then the first decision
        Edge& e = edge("INITIAL", "DECIDE");
        e.resets = {"x"};
    }
    { // transmit branch: announce, count in, then check for a collision
        Edge& e = edge("DECIDE", "CHECK");
        e.weight = p.transmit_prob;
        e.sync = Sync{"busy", SyncDir::Emit};
        e.updates.push_back({"nt", ExprParser("nt + 1").parse()});
        e.resets = {"x"};
    }
    { // wait branch
        Edge& e = edge("DECIDE", "WAIT");
        e.weight = 1.0 - p.transmit_prob;
        e.resets = {"x"};
    }
    { // medium was free at the start instant
        Edge& e = edge("CHECK", "TRANSMIT");
        e.guard.vars.push_back({IntExpr::variable("col"), CmpOp::Eq, IntExpr::constant(0)});
    }
    { // we corrupted an ongoing transmission: stop immediately
        Edge& e = edge("CHECK", "WAIT");
        e.guard.vars.push_back({IntExpr::variable("col"), CmpOp::Eq, IntExpr::constant(1)});
        e.updates.push_back({"col", ExprParser("0").parse()});
        e.updates.push_back({"nt", ExprParser("nt - 1").parse()});
        e.resets = {"x"};
    }
    { // uninterrupted frame of exactly frame_tx_time: success, next frame
        Edge& e = edge("TRANSMIT", "WAIT");
        e.guard.clocks.push_back({"x", CmpOp::Ge, p.frame_tx_time});
        if (p.frames_to_send > 0)
            e.guard.vars.push_back(
                {IntExpr::variable("ns"), CmpOp::Lt, IntExpr::constant(p.frames_to_send - 1)});
        e.updates.push_back({"ns", ExprParser("ns + 1").parse()});
        e.updates.push_back({"nt", ExprParser("nt - 1").parse()});
        e.resets = {"x"};
    }
    if (p.frames_to_send > 0) { // backlog exhausted: leave the medium
        Edge& e = edge("TRANSMIT", "DONE");
        e.guard.clocks.push_back({"x", CmpOp::Ge, p.frame_tx_time});
        e.guard.vars.push_back(
            {IntExpr::variable("ns"), CmpOp::Ge, IntExpr::constant(p.frames_to_send - 1)});
        e.updates.push_back({"ns", ExprParser("ns + 1").parse()});
        e.updates.push_back({"nt", ExprParser("nt - 1").parse()});
        e.resets = {"x"};
    }
    { // somebody else started: both stop transmitting immediately
        Edge& e = edge("TRANSMIT", "WAIT");
        e.sync = Sync{"busy", SyncDir::Receive};
        e.updates.push_back({"col", ExprParser("1").parse()});
        e.updates.push_back({"nt", ExprParser("nt - 1").parse()});
        e.resets = {"x"};
    }
    { // slot over, decide again (the jitter window keeps stations unslotted)
        Edge& e = edge("WAIT", "DECIDE");
        if (p.slot_len > p.slot_jitter)
            e.guard.clocks.push_back({"x", CmpOp::Ge, p.slot_len - p.slot_jitter});
        e.resets = {"x"};
    }
    return a;
}

// Concrete network with one transmit probability per node.
inline Network build_aloha_network(const std::vector<double>& probs, AlohaParams params) {
    if (probs.empty()) throw DomainError("need at least one node");
    Network net;
    net.name = "aloha";
    net.channels = {"busy"};
    net.shared_vars = {{"nt", 0, 0, static_cast<std::int64_t>(probs.size())},
                       {"col", 0, 0, 1}};
    for (std::size_t i = 0; i < probs.size(); ++i) {
        params.transmit_prob = probs[i];
        net.components.push_back(build_aloha_node("Node" + std::to_string(i), params));
    }
    net.build();
    return net;
}

inline std::string aloha_goal(const AlohaParams& p) {
    return "F[time<=" + std::to_string(p.time_bound) + "](ns>=1 && energy<=" +
           std::to_string(p.energy_bound) + ")";
}

// The default 20-point strategy grid {0.05, 0.10, ..., 1.00}.
inline StrategySpace aloha_grid(std::size_t points = 20) {
    StrategySpace s;
    s.label = "TransmitProb";
    for (std::size_t i = 1; i <= points; ++i)
        s.values.push_back(static_cast<double>(i) / static_cast<double>(points));
    return s;
}

inline GameConfig build_aloha(unsigned players, AlohaParams params = {},
                              StrategySpace grid = aloha_grid()) {
    if (players < 2) throw DomainError("the Aloha game needs at least 2 players");
    GameConfig cfg;
    cfg.model_name = "aloha";
    cfg.players = players;
    cfg.strategies = std::move(grid);
    cfg.goal_text = aloha_goal(params);
    cfg.assemble = [params](const GameConfig& c, double p_dev, double p_com) {
        std::vector<double> probs(c.players, p_com);
        unsigned deviants = c.coalition_size == 0 ? 1 : c.coalition_size;
        for (unsigned i = 0; i < deviants && i < c.players; ++i) probs[i] = p_dev;
        return build_aloha_network(probs, params);
    };
    return cfg;
}

// ---------------------------------------------------------------------------
// Unslotted IEEE 802.15.4 CSMA/CA at 20 kbps on the 868 MHz band (BPSK, one
// bit per symbol). The model's time unit is one symbol period (50 us).
//
// Standard-derived constants, in symbols:
//   CCA duration          8   (aCCATime)
//   turnaround            12  (aTurnaroundTime)
//   frame on air          280 (35 bytes = 25 ZigBee header + 10 payload, 8
//                              symbols per byte)
//   ack wait              120 (turnaround + 11-byte immediate ack frame + one
//                              unit backoff period of margin; no explicit ack
//                              exchange is modeled, a corrupted frame simply
//                              gets no ack)
//   unit backoff period   20  (aUnitBackoffPeriod; the swept UnitBackoff
//                              linearly rescales it, 0 meaning no backoff)
//
// Backoff draws are continuous-uniform over [0, (2^BE - 1) * UnitBackoff],
// the binary exponential window unrolled per BE value. A node that starts
// transmitting cannot hear a collision; it learns about one by the missing
// acknowledgment after the full frame. Energy integrates 54 mA (transmit)
// and 26 mA (listen) at 3.0 V, i.e. clock rates 162 and 78 in mW.
//
// Goal bounds are calibrated, not standard-derived: they leave room for
// roughly one contention cycle plus a retry, which is what makes waiting
// behind an aggressive field unprofitable.
// ---------------------------------------------------------------------------

struct CsmaCaParams {
    std::int64_t unit_backoff = 20; // the swept strategy, in symbols
    std::int64_t min_be = 3;
    std::int64_t max_be = 5;
    std::int64_t max_csma_backoffs = 4; // NB budget per attempt
    std::int64_t max_frame_retries = 3; // failed attempts before giving up
    std::int64_t cca_syms = 8;
    std::int64_t turnaround = 12;
    std::int64_t frame_syms = 280;
    std::int64_t ack_wait = 120;
    std::int64_t initial_offset_max = 200;
    std::int64_t time_bound = 1500;
    std::int64_t energy_bound = 160000; // mW * symbols
    std::int64_t tx_rate = 162;         // 54 mA * 3.0 V
    std::int64_t rx_rate = 78;          // 26 mA * 3.0 V
};

inline Automaton build_csma_node(const std::string& name, const CsmaCaParams& p) {
    if (p.unit_backoff < 0) throw DomainError("unit_backoff must be nonnegative");
    if (p.min_be > p.max_be) throw DomainError("min_be must not exceed max_be");
    if (p.max_csma_backoffs < 0 || p.max_frame_retries < 0 || p.cca_syms <= 0 ||
        p.turnaround <= 0 || p.frame_syms <= 0 || p.ack_wait <= 0 ||
        p.initial_offset_max <= 0 || p.time_bound <= 0 || p.energy_bound <= 0)
        throw DomainError("CSMA/CA parameters must be positive");

    Automaton a;
    a.name = name;
    a.clocks = {{"x"}, {"time"}, {"energy"}};
    a.vars = {{"ns", 0, 0, 1 << 20},
              {"bad", 0, 0, 1},
              {"nb", 0, 0, 64},
              {"retries", 0, 0, 1 << 20}};
    a.params["UnitBackoff"] = static_cast<double>(p.unit_backoff);
    a.initial = "INITIAL";

    auto loc = [&](std::string n, std::optional<std::int64_t> x_bound, std::int64_t energy_rate,
                   bool urgent) {
        Location l;
        l.name = std::move(n);
        if (x_bound) l.invariant.push_back({"x", CmpOp::Le, *x_bound});
        l.rates["energy"] = energy_rate;
        l.urgent = urgent;
        a.locations.push_back(std::move(l));
    };
    auto bo_name = [](std::int64_t be) { return "BO" + std::to_string(be); };
    auto cca_name = [](std::int64_t be) { return "CCA" + std::to_string(be); };

    loc("INITIAL", p.initial_offset_max, 0, false);
    for (std::int64_t be = p.min_be; be <= p.max_be; ++be) {
        std::int64_t window = ((std::int64_t{1} << be) - 1) * p.unit_backoff;
        loc(bo_name(be), window, 0, false);
        loc(cca_name(be), p.cca_syms, p.rx_rate, false);
    }
    loc("TURN", p.turnaround, p.rx_rate, false);
    loc("TXCHK", std::nullopt, 0, true);
    loc("TX", p.frame_syms, p.tx_rate, false);
    loc("ACKWAIT", p.ack_wait, p.rx_rate, false);
    loc("RETRY", std::nullopt, 0, true);
    loc("FAILED", std::nullopt, 0, false);
    loc("DONE", std::nullopt, 0, false);

    auto edge = [&](std::string from, std::string to) -> Edge& {
        Edge e;
        e.source = std::move(from);
        e.target = std::move(to);
        a.edges.push_back(std::move(e));
        return a.edges.back();
    };
    auto var_guard = [](Edge& e, const std::string& v, CmpOp op, std::int64_t c) {
        e.guard.vars.push_back({IntExpr::variable(v), op, IntExpr::constant(c)});
    };

    {
        Edge& e = edge("INITIAL", bo_name(p.min_be));
        e.resets = {"x"};
    }
    for (std::int64_t be = p.min_be; be <= p.max_be; ++be) {
        { // backoff elapsed: assess the channel
            Edge& e = edge(bo_name(be), cca_name(be));
            e.resets = {"x"};
        }
        { // clear channel at the end of the assessment: switch to transmit
            Edge& e = edge(cca_name(be), "TURN");
            e.guard.clocks.push_back({"x", CmpOp::Ge, p.cca_syms});
            var_guard(e, "nt", CmpOp::Eq, 0);
            e.resets = {"x"};
        }
        { // busy: widen the window and back off again
            Edge& e = edge(cca_name(be), bo_name(std::min(be + 1, p.max_be)));
            e.guard.clocks.push_back({"x", CmpOp::Ge, p.cca_syms});
            var_guard(e, "nt", CmpOp::Ge, 1);
            var_guard(e, "nb", CmpOp::Lt, p.max_csma_backoffs);
            e.updates.push_back({"nb", ExprParser("nb + 1").parse()});
            e.resets = {"x"};
        }
        { // NB budget exhausted: channel access failure
            Edge& e = edge(cca_name(be), "RETRY");
            e.guard.clocks.push_back({"x", CmpOp::Ge, p.cca_syms});
            var_guard(e, "nt", CmpOp::Ge, 1);
            var_guard(e, "nb", CmpOp::Ge, p.max_csma_backoffs);
            e.resets = {"x"};
        }
    }
    { // committed: transmission starts after the turnaround
        Edge& e = edge("TURN", "TXCHK");
        e.guard.clocks.push_back({"x", CmpOp::Ge, p.turnaround});
        e.sync = Sync{"busy", SyncDir::Emit};
        e.updates.push_back({"nt", ExprParser("nt + 1").parse()});
        e.resets = {"x"};
    }
    { // someone was already on the air: this frame is lost (we can't hear it)
        Edge& e = edge("TXCHK", "TX");
        var_guard(e, "nt", CmpOp::Ge, 2);
        e.updates.push_back({"bad", ExprParser("1").parse()});
    }
    {
        Edge& e = edge("TXCHK", "TX");
        var_guard(e, "nt", CmpOp::Le, 1);
    }
    { // a later transmission corrupts the frame; keep transmitting regardless
        Edge& e = edge("TX", "TX");
        e.sync = Sync{"busy", SyncDir::Receive};
        e.updates.push_back({"bad", ExprParser("1").parse()});
    }
    { // frame completely sent; wait for the acknowledgment
        Edge& e = edge("TX", "ACKWAIT");
        e.guard.clocks.push_back({"x", CmpOp::Ge, p.frame_syms});
        e.updates.push_back({"nt", ExprParser("nt - 1").parse()});
        e.resets = {"x"};
    }
    { // ack arrived: done
        Edge& e = edge("ACKWAIT", "DONE");
        e.guard.clocks.push_back({"x", CmpOp::Ge, p.ack_wait});
        var_guard(e, "bad", CmpOp::Eq, 0);
        e.updates.push_back({"ns", ExprParser("ns + 1").parse()});
    }
    { // no ack within the bound: the frame collided somewhere
        Edge& e = edge("ACKWAIT", "RETRY");
        e.guard.clocks.push_back({"x", CmpOp::Ge, p.ack_wait});
        var_guard(e, "bad", CmpOp::Eq, 1);
        e.resets = {"x"};
    }
    { // fresh attempt: backoff window and NB reset
        Edge& e = edge("RETRY", bo_name(p.min_be));
        var_guard(e, "retries", CmpOp::Lt, p.max_frame_retries);
        e.updates.push_back({"retries", ExprParser("retries + 1").parse()});
        e.updates.push_back({"nb", ExprParser("0").parse()});
        e.updates.push_back({"bad", ExprParser("0").parse()});
        e.resets = {"x"};
    }
    {
        Edge& e = edge("RETRY", "FAILED");
        var_guard(e, "retries", CmpOp::Ge, p.max_frame_retries);
    }
    return a;
}

inline Network build_csma_network(const std::vector<std::int64_t>& backoffs, CsmaCaParams params) {
    if (backoffs.empty()) throw DomainError("need at least one node");
    Network net;
    net.name = "csmaca";
    net.channels = {"busy"};
    net.shared_vars = {{"nt", 0, 0, static_cast<std::int64_t>(backoffs.size())}};
    for (std::size_t i = 0; i < backoffs.size(); ++i) {
        params.unit_backoff = backoffs[i];
        net.components.push_back(build_csma_node("Node" + std::to_string(i), params));
    }
    net.build();
    return net;
}

inline std::string csma_goal(const CsmaCaParams& p) {
    return "F[time<=" + std::to_string(p.time_bound) + "](ns>=1 && energy<=" +
           std::to_string(p.energy_bound) + ")";
}

// Default UnitBackoff grid {0, 5, 10, ..., 50}.
inline StrategySpace csma_grid(std::int64_t step = 5, std::int64_t max = 50) {
    StrategySpace s;
    s.label = "UnitBackoff";
    for (std::int64_t v = 0; v <= max; v += step) s.values.push_back(static_cast<double>(v));
    return s;
}

inline GameConfig build_csma_ca(unsigned players, CsmaCaParams params = {},
                                StrategySpace grid = csma_grid(), unsigned coalition_size = 0) {
    if (players < 2) throw DomainError("the CSMA/CA game needs at least 2 players");
    if (coalition_size > 0 && players % coalition_size != 0)
        throw DomainError("coalition_size must divide the player count");
    GameConfig cfg;
    cfg.model_name = "csmaca";
    cfg.players = players;
    cfg.coalition_size = coalition_size;
    cfg.strategies = std::move(grid);
    cfg.goal_text = csma_goal(params);
    cfg.assemble = [params](const GameConfig& c, double p_dev, double p_com) {
        std::vector<std::int64_t> ks(c.players, static_cast<std::int64_t>(p_com));
        unsigned deviants = c.coalition_size == 0 ? 1 : c.coalition_size;
        for (unsigned i = 0; i < deviants && i < c.players; ++i)
            ks[i] = static_cast<std::int64_t>(p_dev);
        return build_csma_network(ks, params);
    };
    return cfg;
}

} // namespace smcnash
