#pragma once

#include "smcnash/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace smcnash {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerance for clock-guard comparisons in the time domain. Deterministic
// models resynchronize components on purpose (equal slot lengths, aborts at
// the same instant), so exact-boundary firings are routine, and summing
// elapsed time rounds by an ulp per step. Model constants are integers;
// 1e-9 is far below any legitimate distinction. Integer variable guards are
// always exact.
inline constexpr double kTimeSlack = 1e-9;

// Joint state of a network. Clock values are not stored directly: each clock
// keeps the value and global time of its last anchor point (reset, or a
// location change that altered its rate). The current value is
//   anchor_val + rate * (elapsed - anchor_time)
// so chained delays never re-round a clock value and guard thresholds can be
// compared consistently in the time domain.
struct SystemState {
    std::vector<LocationId> locations;
    std::vector<double> clock_anchor_val;
    std::vector<double> clock_anchor_time;
    std::vector<std::int64_t> vars;
    double elapsed = 0.0;

    bool operator==(const SystemState& o) const = default;
};

inline SystemState initial_state(const Network& net) {
    SystemState s;
    s.locations.reserve(net.comps().size());
    for (const CompiledComponent& c : net.comps()) s.locations.push_back(c.initial);
    s.clock_anchor_val.assign(net.n_clocks(), 0.0);
    s.clock_anchor_time.assign(net.n_clocks(), 0.0);
    s.vars = net.initial_vars();
    s.elapsed = 0.0;
    return s;
}

inline std::int64_t clock_rate(const Network& net, const SystemState& s, ClockId c) {
    ComponentId owner = net.clock_owner(c);
    return net.rate_of(owner, s.locations[owner], c);
}

inline double clock_value(const Network& net, const SystemState& s, ClockId c) {
    return s.clock_anchor_val[c] +
           static_cast<double>(clock_rate(net, s, c)) * (s.elapsed - s.clock_anchor_time[c]);
}

// Truth of a clock bound after delaying d from s. < / <= and > / >= are
// treated alike at the crossing instant itself (measure-zero under the
// continuous delay distributions).
inline bool bound_holds_at(const Network& net, const SystemState& s, const CompiledBound& b,
                           double d) {
    double v = clock_value(net, s, b.clock);
    auto r = static_cast<double>(clock_rate(net, s, b.clock));
    bool upper = b.op == CmpOp::Le || b.op == CmpOp::Lt;
    if (r <= 0.0) return upper ? v <= b.bound : v >= b.bound;
    double t = (b.bound - v) / r;
    return upper ? d <= t + kTimeSlack : d >= t - kTimeSlack;
}

inline bool var_guard_holds(const Network& net, const std::vector<CompiledVarCompare>& g,
                            const std::vector<std::int64_t>& vars) {
    for (const CompiledVarCompare& c : g)
        if (!cmp_int(net.eval_expr(c.lhs, vars), c.op, net.eval_expr(c.rhs, vars))) return false;
    return true;
}

inline bool edge_enabled_at(const Network& net, const SystemState& s, const CompiledEdge& e,
                            double d) {
    if (!var_guard_holds(net, e.var_guard, s.vars)) return false;
    for (const CompiledBound& b : e.clock_guard)
        if (!bound_holds_at(net, s, b, d)) return false;
    return true;
}

// Supremum delay keeping one component's invariant satisfied.
inline double component_max_delay(const Network& net, const SystemState& s, ComponentId ci) {
    const CompiledComponent& c = net.comps()[ci];
    const CompiledLocation& loc = c.locations[s.locations[ci]];
    if (loc.urgent) return 0.0;
    double d = kInf;
    for (const CompiledBound& b : loc.invariant) {
        double v = clock_value(net, s, b.clock);
        auto r = static_cast<double>(clock_rate(net, s, b.clock));
        if (r <= 0.0) {
            if (v > b.bound) {
                std::ostringstream os;
                os << "invariant violated in " << c.name << "." << loc.name << ": frozen clock "
                   << net.clock_name(b.clock) << " = " << v << " exceeds bound " << b.bound;
                throw SemanticError(os.str());
            }
            continue; // bound unreachable
        }
        double t = (b.bound - v) / r;
        if (t < -kTimeSlack) {
            std::ostringstream os;
            os << "invariant violated in " << c.name << "." << loc.name << ": clock "
               << net.clock_name(b.clock) << " = " << v << " exceeds bound " << b.bound;
            throw SemanticError(os.str());
        }
        d = std::min(d, std::max(t, 0.0));
    }
    return d;
}

inline double max_delay(const Network& net, const SystemState& s) {
    double d = kInf;
    for (ComponentId ci = 0; ci < net.comps().size(); ++ci)
        d = std::min(d, component_max_delay(net, s, ci));
    return d;
}

// Earliest delay in [0, d_max] at which some act (internal/emit) edge of the
// component becomes enabled; nullopt when no act edge can be enabled by
// delaying alone. Variables are frozen during delays, so var guards either
// hold now or not at all.
inline std::optional<double> earliest_enabled_delay(const Network& net, const SystemState& s,
                                                    ComponentId ci, double d_max) {
    const CompiledComponent& c = net.comps()[ci];
    const CompiledLocation& loc = c.locations[s.locations[ci]];
    std::optional<double> best;
    for (std::uint32_t ei : loc.act_edges) {
        const CompiledEdge& e = c.edges[ei];
        if (!var_guard_holds(net, e.var_guard, s.vars)) continue;
        double lo = 0.0, hi = kInf;
        bool feasible = true;
        for (const CompiledBound& b : e.clock_guard) {
            double v = clock_value(net, s, b.clock);
            auto r = static_cast<double>(clock_rate(net, s, b.clock));
            bool upper = b.op == CmpOp::Le || b.op == CmpOp::Lt;
            if (r <= 0.0) {
                if (upper ? v > b.bound : v < b.bound) { feasible = false; break; }
                continue;
            }
            double t = (b.bound - v) / r;
            if (upper)
                hi = std::min(hi, t + kTimeSlack);
            else
                lo = std::max(lo, t - kTimeSlack);
        }
        if (!feasible) continue;
        lo = std::max(lo, 0.0);
        if (lo > hi || lo > d_max + kTimeSlack) continue;
        double when = std::min(lo, d_max);
        if (!best || when < *best) best = when;
    }
    return best;
}

inline void materialize_clocks(const Network& net, const SystemState& s, std::vector<double>& out) {
    out.resize(net.n_clocks());
    for (ClockId c = 0; c < net.n_clocks(); ++c) out[c] = clock_value(net, s, c);
}

// Advances every clock by rate * d. Anchors are untouched, so chained delays
// are equivalent to one combined delay up to the final rounding of elapsed.
inline void apply_delay_inplace(const Network& net, SystemState& s, double d) {
    if (d < 0.0) throw SemanticError("negative delay");
    if (d == 0.0) return;
    double m = max_delay(net, s);
    if (d > m) {
        std::ostringstream os;
        os << "delay " << d << " exceeds max_delay " << m;
        throw SemanticError(os.str());
    }
    s.elapsed += d;
}

inline SystemState apply_delay(const Network& net, const SystemState& s, double d) {
    SystemState out = s;
    apply_delay_inplace(net, out, d);
    return out;
}

struct EdgeRef {
    ComponentId component = 0;
    std::uint32_t edge = 0; // index into that component's edge list

    bool operator==(const EdgeRef& o) const = default;
};

// Re-anchors the clocks of one component after a location change: resets go
// to zero; other clocks re-anchor only when their rate changes, freezing the
// exact value an observer would have seen.
inline void move_component(const Network& net, SystemState& s, ComponentId ci,
                           const CompiledEdge& e) {
    const CompiledComponent& c = net.comps()[ci];
    const CompiledLocation& from = c.locations[e.source];
    const CompiledLocation& to = c.locations[e.target];
    for (std::uint32_t k = 0; k < c.n_clocks; ++k) {
        ClockId flat = c.clock_base + k;
        bool reset = std::find(e.resets.begin(), e.resets.end(), flat) != e.resets.end();
        if (reset) {
            s.clock_anchor_val[flat] = 0.0;
            s.clock_anchor_time[flat] = s.elapsed;
        } else if (from.rates[k] != to.rates[k]) {
            double v = s.clock_anchor_val[flat] +
                       static_cast<double>(from.rates[k]) * (s.elapsed - s.clock_anchor_time[flat]);
            s.clock_anchor_val[flat] = v;
            s.clock_anchor_time[flat] = s.elapsed;
        }
    }
    s.locations[ci] = e.target;
}

inline void apply_updates(const Network& net, SystemState& s, const CompiledEdge& e,
                          const std::string& comp_name) {
    for (const CompiledUpdate& u : e.updates) {
        std::int64_t v = net.eval_expr(u.expr, s.vars);
        const VarDecl& d = net.var_decls()[u.var];
        if (v < d.min || v > d.max) {
            std::ostringstream os;
            os << "update in " << comp_name << " pushes " << net.var_name(u.var) << " to " << v
               << ", outside [" << d.min << ", " << d.max << "]";
            throw RangeError(os.str());
        }
        s.vars[u.var] = v;
    }
}

inline void check_invariant_after_move(const Network& net, const SystemState& s, ComponentId ci) {
    const CompiledComponent& c = net.comps()[ci];
    const CompiledLocation& loc = c.locations[s.locations[ci]];
    for (const CompiledBound& b : loc.invariant) {
        double v = clock_value(net, s, b.clock);
        // The slack absorbs elapsed-summation rounding at exact-boundary
        // firings; genuine model bugs overshoot by model-scale amounts.
        if (v > b.bound + kTimeSlack * std::max(1.0, b.bound)) {
            std::ostringstream os;
            os << "edge into " << c.name << "." << loc.name << " violates its invariant on "
               << net.clock_name(b.clock) << " (= " << v << " > " << b.bound
               << "); the edge was not truly enabled";
            throw SemanticError(os.str());
        }
    }
}

// Fires an act edge, assuming its guard held. For an emit edge, every other
// component with an enabled receive edge on the channel moves in the same
// step; updates run emitter first, then receivers in ascending component
// order. A component with several enabled receive edges takes the first in
// declaration order.
inline void fire_edge_inplace(const Network& net, SystemState& s, const EdgeRef& choice) {
    const CompiledComponent& wc = net.comps()[choice.component];
    const CompiledEdge& we = wc.edges[choice.edge];

    // Receivers are selected against the pre-update state.
    static thread_local std::vector<std::pair<ComponentId, const CompiledEdge*>> receivers;
    receivers.clear();
    if (we.channel != kNoId && we.dir == SyncDir::Emit) {
        for (ComponentId ci = 0; ci < net.comps().size(); ++ci) {
            if (ci == choice.component) continue;
            const CompiledComponent& c = net.comps()[ci];
            const CompiledLocation& loc = c.locations[s.locations[ci]];
            for (std::uint32_t ei : loc.recv_edges[we.channel]) {
                if (edge_enabled_at(net, s, c.edges[ei], 0.0)) {
                    receivers.emplace_back(ci, &c.edges[ei]);
                    break;
                }
            }
        }
    }

    move_component(net, s, choice.component, we);
    apply_updates(net, s, we, wc.name);
    for (auto& [ci, re] : receivers) {
        move_component(net, s, ci, *re);
        apply_updates(net, s, *re, net.comps()[ci].name);
    }
    check_invariant_after_move(net, s, choice.component);
    for (auto& [ci, re] : receivers) check_invariant_after_move(net, s, ci);
}

inline SystemState apply_edge(const Network& net, const SystemState& s, const EdgeRef& choice) {
    const CompiledEdge& we = net.comps()[choice.component].edges[choice.edge];
    if (we.channel != kNoId && we.dir == SyncDir::Receive)
        throw SemanticError("a receive edge cannot be fired standalone");
    SystemState out = s;
    fire_edge_inplace(net, out, choice);
    return out;
}

// All currently enabled act edges, plus receive edges that would fire right
// now because an enabled emitter in another component shares their channel.
inline std::vector<EdgeRef> enabled_edges(const Network& net, const SystemState& s) {
    std::vector<EdgeRef> out;
    std::vector<bool> live_channel(net.n_channels(), false);
    for (ComponentId ci = 0; ci < net.comps().size(); ++ci) {
        const CompiledComponent& c = net.comps()[ci];
        const CompiledLocation& loc = c.locations[s.locations[ci]];
        for (std::uint32_t ei : loc.act_edges) {
            if (edge_enabled_at(net, s, c.edges[ei], 0.0)) {
                out.push_back({ci, ei});
                if (c.edges[ei].channel != kNoId) live_channel[c.edges[ei].channel] = true;
            }
        }
    }
    std::size_t n_act = out.size();
    for (ComponentId ci = 0; ci < net.comps().size(); ++ci) {
        const CompiledComponent& c = net.comps()[ci];
        const CompiledLocation& loc = c.locations[s.locations[ci]];
        for (ChannelId ch = 0; ch < net.n_channels(); ++ch) {
            if (!live_channel[ch]) continue;
            bool emitter_elsewhere = false;
            for (std::size_t k = 0; k < n_act; ++k) {
                const CompiledEdge& e = net.comps()[out[k].component].edges[out[k].edge];
                if (e.channel == ch && e.dir == SyncDir::Emit && out[k].component != ci) {
                    emitter_elsewhere = true;
                    break;
                }
            }
            if (!emitter_elsewhere) continue;
            for (std::uint32_t ei : loc.recv_edges[ch])
                if (edge_enabled_at(net, s, c.edges[ei], 0.0)) out.push_back({ci, ei});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structural validation. Returns human-readable diagnostics with component
// and edge coordinates; empty means the network satisfies every structural
// invariant the simulator relies on.
// ---------------------------------------------------------------------------

inline std::vector<std::string> validate(const Network& net_in) {
    std::vector<std::string> diags;
    Network net = net_in;
    if (!net.built()) {
        try {
            net.build();
        } catch (const Error& e) {
            diags.emplace_back(e.what());
            return diags;
        }
    }

    for (std::uint32_t ci = 0; ci < net.components.size(); ++ci) {
        const Automaton& a = net.components[ci];
        for (const Location& l : a.locations) {
            for (const AtomicBound& b : l.invariant) {
                if (b.op != CmpOp::Le && b.op != CmpOp::Lt)
                    diags.push_back(a.name + "." + l.name + ": invariant on " + b.clock +
                                    " must be an upper bound (<= or <)");
                if (b.bound < 0)
                    diags.push_back(a.name + "." + l.name + ": negative invariant bound on " + b.clock);
            }
            for (const auto& [cn, r] : l.rates)
                if (r < 0) diags.push_back(a.name + "." + l.name + ": negative rate for clock " + cn);
            if (l.exp_rate && *l.exp_rate <= 0.0)
                diags.push_back(a.name + "." + l.name + ": exp_rate must be positive");
        }
        for (std::uint32_t ei = 0; ei < a.edges.size(); ++ei) {
            const Edge& e = a.edges[ei];
            std::string where =
                a.name + " edge #" + std::to_string(ei) + " (" + e.source + " -> " + e.target + ")";
            for (const AtomicBound& b : e.guard.clocks) {
                if (b.op == CmpOp::Eq || b.op == CmpOp::Ne)
                    diags.push_back(where + ": == and != are not allowed on clocks");
                if (b.bound < 0) diags.push_back(where + ": negative clock bound");
            }
            if (!(e.weight >= 0.0)) diags.push_back(where + ": branch weight must be nonnegative");
        }
    }

    for (const VarDecl& v : net.var_decls())
        if (v.init < v.min || v.init > v.max)
            diags.push_back("variable " + v.name + ": initial value outside declared range");

    return diags;
}

inline std::string label_of(const Network& net, const EdgeRef& er) {
    const CompiledComponent& c = net.comps()[er.component];
    const CompiledEdge& e = c.edges[er.edge];
    std::string s = c.name + ":" + c.locations[e.source].name + "->" + c.locations[e.target].name;
    if (e.channel != kNoId) {
        const Edge& raw = net.components[er.component].edges[er.edge];
        s += "[" + raw.sync->channel + (e.dir == SyncDir::Emit ? "!" : "?") + "]";
    }
    return s;
}

} // namespace smcnash
