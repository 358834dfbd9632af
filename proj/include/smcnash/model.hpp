#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace smcnash {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class SemanticError : public Error { public: using Error::Error; };
class RangeError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

using ClockId = std::uint32_t;   // flat index into Network clock table
using VarId = std::uint32_t;     // flat index into Network var table
using LocationId = std::uint32_t; // index into owning component's locations
using ChannelId = std::uint32_t;
using ComponentId = std::uint32_t;

inline constexpr std::uint32_t kNoId = 0xFFFFFFFFu;

enum class CmpOp : std::uint8_t { Lt, Le, Gt, Ge, Eq, Ne };

inline const char* to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
        case CmpOp::Eq: return "==";
        case CmpOp::Ne: return "!=";
    }
    return "?";
}

inline bool cmp_int(std::int64_t a, CmpOp op, std::int64_t b) {
    switch (op) {
        case CmpOp::Lt: return a < b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Gt: return a > b;
        case CmpOp::Ge: return a >= b;
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
    }
    return false;
}

// Clock bound x ~ n with integer n >= 0. Only <,<=,>,>= are allowed on
// clocks; == and != are rejected at validation (knife-edge on reals).
struct AtomicBound {
    std::string clock;
    CmpOp op = CmpOp::Le;
    std::int64_t bound = 0;
};

// Tiny integer expression tree for guards and updates: constants, variable
// reads, + - *. Enough for the bundled protocol models and fixed update
// expressions; no user-defined functions.
struct IntExpr {
    enum class Kind : std::uint8_t { Const, Var, Add, Sub, Mul } kind = Kind::Const;
    std::int64_t value = 0;     // Const
    std::string var;            // Var
    std::shared_ptr<IntExpr> lhs, rhs;

    static IntExpr constant(std::int64_t v) {
        IntExpr e; e.kind = Kind::Const; e.value = v; return e;
    }
    static IntExpr variable(std::string name) {
        IntExpr e; e.kind = Kind::Var; e.var = std::move(name); return e;
    }
    static IntExpr binary(Kind k, IntExpr a, IntExpr b) {
        IntExpr e; e.kind = k;
        e.lhs = std::make_shared<IntExpr>(std::move(a));
        e.rhs = std::make_shared<IntExpr>(std::move(b));
        return e;
    }
};

struct VarCompare {
    IntExpr lhs;
    CmpOp op = CmpOp::Eq;
    IntExpr rhs;
};

// Purely conjunctive guard: clock bounds plus integer comparisons.
struct Guard {
    std::vector<AtomicBound> clocks;
    std::vector<VarCompare> vars;
};

enum class SyncDir : std::uint8_t { Emit, Receive };

struct Sync {
    std::string channel;
    SyncDir dir = SyncDir::Emit;
};

struct Update {
    std::string var;
    IntExpr expr;
};

struct Edge {
    std::string source;
    std::string target;
    Guard guard;
    std::vector<std::string> resets;  // clock names, set semantics
    std::vector<Update> updates;      // applied in listed order
    std::optional<Sync> sync;
    double weight = 1.0;              // branch weight among a winner's enabled edges
};

struct Location {
    std::string name;
    std::vector<AtomicBound> invariant;        // upper bounds only (<=, <)
    std::map<std::string, std::int64_t> rates; // clock -> rate; absent => 1
    bool urgent = false;
    std::optional<double> exp_rate;            // delay rate when unbounded; default 1
};

struct VarDecl {
    std::string name;
    std::int64_t init = 0;
    std::int64_t min = std::numeric_limits<std::int32_t>::min();
    std::int64_t max = std::numeric_limits<std::int32_t>::max();
};

struct ClockDecl {
    std::string name;
};

// One WTA component. Names are resolved against the owning Network when the
// network is built; an Automaton on its own is just declarative data.
struct Automaton {
    std::string name;
    std::vector<ClockDecl> clocks;
    std::vector<VarDecl> vars;
    std::vector<Location> locations;
    std::string initial;
    std::vector<Edge> edges;
    std::map<std::string, double> params; // bound parameter values, for the record
};

// ---------------------------------------------------------------------------
// Compiled network: flat symbol tables and per-location indexes. Immutable
// after build(); safe to share across worker threads.
// ---------------------------------------------------------------------------

struct CompiledBound {
    ClockId clock = 0;
    CmpOp op = CmpOp::Le;
    double bound = 0;
};

struct CompiledExpr {
    enum class Kind : std::uint8_t { Const, Var, Add, Sub, Mul } kind = Kind::Const;
    std::int64_t value = 0;
    VarId var = 0;
    std::int32_t lhs = -1, rhs = -1; // indices into the expression pool
};

struct CompiledVarCompare {
    std::int32_t lhs = -1;
    CmpOp op = CmpOp::Eq;
    std::int32_t rhs = -1;
};

struct CompiledUpdate {
    VarId var = 0;
    std::int32_t expr = -1;
};

struct CompiledEdge {
    ComponentId component = 0;
    LocationId source = 0;
    LocationId target = 0;
    std::vector<CompiledBound> clock_guard;
    std::vector<CompiledVarCompare> var_guard;
    std::vector<ClockId> resets;
    std::vector<CompiledUpdate> updates;
    ChannelId channel = kNoId;    // kNoId when internal
    SyncDir dir = SyncDir::Emit;  // meaningful when channel != kNoId
    double weight = 1.0;
    std::uint32_t index = 0;      // position in the component's edge list
};

struct CompiledLocation {
    std::string name;
    std::vector<CompiledBound> invariant;     // upper bounds
    std::vector<std::int64_t> rates;          // per owned clock (local order)
    bool urgent = false;
    double exp_rate = 1.0;
    std::vector<std::uint32_t> act_edges;     // internal + emit edges leaving here
    std::vector<std::uint32_t> all_edges;     // every edge leaving here
    // receive edges leaving here, grouped per channel
    std::vector<std::vector<std::uint32_t>> recv_edges;
};

struct CompiledComponent {
    std::string name;
    LocationId initial = 0;
    ClockId clock_base = 0;       // first flat clock index
    std::uint32_t n_clocks = 0;
    std::vector<std::string> clock_names;
    std::vector<CompiledLocation> locations;
    std::vector<CompiledEdge> edges;
};

class Network {
public:
    std::string name = "network";
    std::vector<Automaton> components;
    std::vector<VarDecl> shared_vars;
    std::vector<std::string> channels;

    // Resolves names, flattens symbol tables and builds per-location edge
    // indexes. Throws ConfigError on unresolvable references; structural
    // rule violations are reported by validate() instead where possible.
    void build();

    bool built() const { return built_; }

    const std::vector<CompiledComponent>& comps() const { return comps_; }
    const std::vector<CompiledExpr>& exprs() const { return exprs_; }

    std::uint32_t n_clocks() const { return n_clocks_; }
    std::uint32_t n_vars() const { return static_cast<std::uint32_t>(var_decls_.size()); }
    std::uint32_t n_channels() const { return static_cast<std::uint32_t>(channels.size()); }

    const std::vector<VarDecl>& var_decls() const { return var_decls_; }
    const std::string& var_name(VarId v) const { return var_names_[v]; }
    const std::string& clock_name(ClockId c) const { return clock_names_[c]; }
    ComponentId clock_owner(ClockId c) const { return clock_owner_[c]; }

    // Name lookup. Component-qualified form "Comp.x"; unqualified names
    // resolve against component 0 first, then the shared/global tables.
    std::optional<ClockId> find_clock(const std::string& qualified) const;
    std::optional<VarId> find_var(const std::string& qualified) const;
    std::optional<ComponentId> find_component(const std::string& name) const;
    std::optional<ChannelId> find_channel(const std::string& name) const;

    ClockId clock_in(ComponentId c, const std::string& local_name) const;
    VarId var_in(ComponentId c, const std::string& local_name) const;

    std::int64_t eval_expr(std::int32_t idx, const std::vector<std::int64_t>& vars) const {
        const CompiledExpr& e = exprs_[static_cast<std::size_t>(idx)];
        switch (e.kind) {
            case CompiledExpr::Kind::Const: return e.value;
            case CompiledExpr::Kind::Var: return vars[e.var];
            case CompiledExpr::Kind::Add: return eval_expr(e.lhs, vars) + eval_expr(e.rhs, vars);
            case CompiledExpr::Kind::Sub: return eval_expr(e.lhs, vars) - eval_expr(e.rhs, vars);
            case CompiledExpr::Kind::Mul: return eval_expr(e.lhs, vars) * eval_expr(e.rhs, vars);
        }
        return 0;
    }

    std::int64_t rate_of(ComponentId comp, LocationId loc, ClockId flat) const {
        const CompiledComponent& c = comps_[comp];
        return c.locations[loc].rates[flat - c.clock_base];
    }

    std::vector<std::int64_t> initial_vars() const { return initial_vars_; }

private:
    friend class NetworkBuilderAccess;

    std::int32_t compile_expr(const IntExpr& e, ComponentId ctx);
    VarId resolve_var(const std::string& name, ComponentId ctx) const;
    ClockId resolve_clock(const std::string& name, ComponentId ctx) const;

    bool built_ = false;
    std::vector<CompiledComponent> comps_;
    std::vector<CompiledExpr> exprs_;
    std::uint32_t n_clocks_ = 0;

    std::vector<VarDecl> var_decls_;        // shared vars first, then per-component
    std::vector<std::string> var_names_;    // qualified names for messages
    std::vector<std::string> clock_names_;
    std::vector<ComponentId> clock_owner_;
    std::vector<std::int64_t> initial_vars_;

    std::unordered_map<std::string, VarId> shared_var_ids_;
    std::vector<std::unordered_map<std::string, VarId>> local_var_ids_;
    std::vector<std::unordered_map<std::string, ClockId>> local_clock_ids_;
    std::unordered_map<std::string, ChannelId> channel_ids_;
    std::unordered_map<std::string, ComponentId> component_ids_;
};

// --------------------------------------------------------------------------

inline std::int32_t Network::compile_expr(const IntExpr& e, ComponentId ctx) {
    CompiledExpr out;
    switch (e.kind) {
        case IntExpr::Kind::Const:
            out.kind = CompiledExpr::Kind::Const;
            out.value = e.value;
            break;
        case IntExpr::Kind::Var:
            out.kind = CompiledExpr::Kind::Var;
            out.var = resolve_var(e.var, ctx);
            break;
        case IntExpr::Kind::Add:
        case IntExpr::Kind::Sub:
        case IntExpr::Kind::Mul: {
            out.kind = e.kind == IntExpr::Kind::Add ? CompiledExpr::Kind::Add
                     : e.kind == IntExpr::Kind::Sub ? CompiledExpr::Kind::Sub
                                                    : CompiledExpr::Kind::Mul;
            out.lhs = compile_expr(*e.lhs, ctx);
            out.rhs = compile_expr(*e.rhs, ctx);
            break;
        }
    }
    exprs_.push_back(out);
    return static_cast<std::int32_t>(exprs_.size() - 1);
}

inline VarId Network::resolve_var(const std::string& name, ComponentId ctx) const {
    auto dot = name.find('.');
    if (dot != std::string::npos) {
        auto comp = find_component(name.substr(0, dot));
        if (!comp) throw ConfigError("unknown component in variable reference: " + name);
        const auto& tab = local_var_ids_[*comp];
        auto it = tab.find(name.substr(dot + 1));
        if (it == tab.end()) throw ConfigError("unknown variable: " + name);
        return it->second;
    }
    if (ctx != kNoId) {
        const auto& tab = local_var_ids_[ctx];
        auto it = tab.find(name);
        if (it != tab.end()) return it->second;
    }
    auto it = shared_var_ids_.find(name);
    if (it != shared_var_ids_.end()) return it->second;
    throw ConfigError("unknown variable: " + name +
                      (ctx == kNoId ? "" : " (in component " + comps_[ctx].name + ")"));
}

inline ClockId Network::resolve_clock(const std::string& name, ComponentId ctx) const {
    auto dot = name.find('.');
    if (dot != std::string::npos) {
        auto comp = find_component(name.substr(0, dot));
        if (!comp) throw ConfigError("unknown component in clock reference: " + name);
        const auto& tab = local_clock_ids_[*comp];
        auto it = tab.find(name.substr(dot + 1));
        if (it == tab.end()) throw ConfigError("unknown clock: " + name);
        return it->second;
    }
    if (ctx == kNoId) throw ConfigError("unqualified clock outside component context: " + name);
    const auto& tab = local_clock_ids_[ctx];
    auto it = tab.find(name);
    if (it == tab.end())
        throw ConfigError("unknown clock: " + name + " (in component " + comps_[ctx].name + ")");
    return it->second;
}

inline std::optional<ClockId> Network::find_clock(const std::string& q) const {
    auto dot = q.find('.');
    ComponentId ctx = 0;
    std::string local = q;
    if (dot != std::string::npos) {
        auto comp = find_component(q.substr(0, dot));
        if (!comp) return std::nullopt;
        ctx = *comp;
        local = q.substr(dot + 1);
    }
    if (ctx >= local_clock_ids_.size()) return std::nullopt;
    auto it = local_clock_ids_[ctx].find(local);
    if (it == local_clock_ids_[ctx].end()) return std::nullopt;
    return it->second;
}

inline std::optional<VarId> Network::find_var(const std::string& q) const {
    auto dot = q.find('.');
    if (dot != std::string::npos) {
        auto comp = find_component(q.substr(0, dot));
        if (!comp) return std::nullopt;
        auto it = local_var_ids_[*comp].find(q.substr(dot + 1));
        if (it == local_var_ids_[*comp].end()) return std::nullopt;
        return it->second;
    }
    if (!local_var_ids_.empty()) {
        auto it = local_var_ids_[0].find(q);
        if (it != local_var_ids_[0].end()) return it->second;
    }
    auto it = shared_var_ids_.find(q);
    if (it == shared_var_ids_.end()) return std::nullopt;
    return it->second;
}

inline std::optional<ComponentId> Network::find_component(const std::string& name) const {
    auto it = component_ids_.find(name);
    if (it == component_ids_.end()) return std::nullopt;
    return it->second;
}

inline std::optional<ChannelId> Network::find_channel(const std::string& name) const {
    auto it = channel_ids_.find(name);
    if (it == channel_ids_.end()) return std::nullopt;
    return it->second;
}

inline ClockId Network::clock_in(ComponentId c, const std::string& local_name) const {
    auto it = local_clock_ids_[c].find(local_name);
    if (it == local_clock_ids_[c].end())
        throw ConfigError("unknown clock " + local_name + " in " + comps_[c].name);
    return it->second;
}

inline VarId Network::var_in(ComponentId c, const std::string& local_name) const {
    auto it = local_var_ids_[c].find(local_name);
    if (it == local_var_ids_[c].end())
        throw ConfigError("unknown variable " + local_name + " in " + comps_[c].name);
    return it->second;
}

inline void Network::build() {
    comps_.clear();
    exprs_.clear();
    var_decls_.clear();
    var_names_.clear();
    clock_names_.clear();
    clock_owner_.clear();
    initial_vars_.clear();
    shared_var_ids_.clear();
    local_var_ids_.clear();
    local_clock_ids_.clear();
    channel_ids_.clear();
    component_ids_.clear();
    n_clocks_ = 0;

    for (std::uint32_t i = 0; i < channels.size(); ++i) {
        if (!channel_ids_.emplace(channels[i], i).second)
            throw ConfigError("duplicate channel: " + channels[i]);
    }
    for (const VarDecl& v : shared_vars) {
        if (!shared_var_ids_.emplace(v.name, static_cast<VarId>(var_decls_.size())).second)
            throw ConfigError("duplicate shared variable: " + v.name);
        var_decls_.push_back(v);
        var_names_.push_back(v.name);
    }

    comps_.resize(components.size());
    local_var_ids_.resize(components.size());
    local_clock_ids_.resize(components.size());
    for (std::uint32_t ci = 0; ci < components.size(); ++ci) {
        if (!component_ids_.emplace(components[ci].name, ci).second)
            throw ConfigError("duplicate component name: " + components[ci].name);
    }

    // Declare all clocks and vars first; edges may reference across components.
    for (std::uint32_t ci = 0; ci < components.size(); ++ci) {
        const Automaton& a = components[ci];
        CompiledComponent& cc = comps_[ci];
        cc.name = a.name;
        cc.clock_base = n_clocks_;
        cc.n_clocks = static_cast<std::uint32_t>(a.clocks.size());
        for (const ClockDecl& cd : a.clocks) {
            if (!local_clock_ids_[ci].emplace(cd.name, n_clocks_).second)
                throw ConfigError("duplicate clock " + cd.name + " in " + a.name);
            cc.clock_names.push_back(cd.name);
            clock_names_.push_back(a.name + "." + cd.name);
            clock_owner_.push_back(ci);
            ++n_clocks_;
        }
        for (const VarDecl& v : a.vars) {
            if (shared_var_ids_.count(v.name))
                throw ConfigError("variable " + v.name + " in " + a.name + " shadows a shared variable");
            if (!local_var_ids_[ci].emplace(v.name, static_cast<VarId>(var_decls_.size())).second)
                throw ConfigError("duplicate variable " + v.name + " in " + a.name);
            var_decls_.push_back(v);
            var_names_.push_back(a.name + "." + v.name);
        }
    }
    for (const VarDecl& v : var_decls_) initial_vars_.push_back(v.init);

    for (std::uint32_t ci = 0; ci < components.size(); ++ci) {
        const Automaton& a = components[ci];
        CompiledComponent& cc = comps_[ci];
        std::unordered_map<std::string, LocationId> loc_ids;
        for (std::uint32_t li = 0; li < a.locations.size(); ++li) {
            if (!loc_ids.emplace(a.locations[li].name, li).second)
                throw ConfigError("duplicate location " + a.locations[li].name + " in " + a.name);
        }
        auto need_loc = [&](const std::string& n) -> LocationId {
            auto it = loc_ids.find(n);
            if (it == loc_ids.end())
                throw ConfigError("unknown location " + n + " in " + a.name);
            return it->second;
        };
        cc.initial = need_loc(a.initial);

        for (const Location& l : a.locations) {
            CompiledLocation cl;
            cl.name = l.name;
            cl.urgent = l.urgent;
            cl.exp_rate = l.exp_rate.value_or(1.0);
            cl.rates.assign(cc.n_clocks, 1);
            for (const auto& [cn, r] : l.rates) {
                ClockId flat = resolve_clock(cn, ci);
                cl.rates[flat - cc.clock_base] = r;
            }
            for (const AtomicBound& b : l.invariant) {
                CompiledBound cb;
                cb.clock = resolve_clock(b.clock, ci);
                cb.op = b.op;
                cb.bound = static_cast<double>(b.bound);
                cl.invariant.push_back(cb);
            }
            cl.recv_edges.assign(channels.size(), {});
            cc.locations.push_back(std::move(cl));
        }

        for (std::uint32_t ei = 0; ei < a.edges.size(); ++ei) {
            const Edge& e = a.edges[ei];
            try {
            CompiledEdge ce;
            ce.component = ci;
            ce.index = ei;
            ce.source = need_loc(e.source);
            ce.target = need_loc(e.target);
            ce.weight = e.weight;
            for (const AtomicBound& b : e.guard.clocks) {
                CompiledBound cb;
                cb.clock = resolve_clock(b.clock, ci);
                cb.op = b.op;
                cb.bound = static_cast<double>(b.bound);
                ce.clock_guard.push_back(cb);
            }
            for (const VarCompare& vc : e.guard.vars) {
                CompiledVarCompare c;
                c.lhs = compile_expr(vc.lhs, ci);
                c.op = vc.op;
                c.rhs = compile_expr(vc.rhs, ci);
                ce.var_guard.push_back(c);
            }
            for (const std::string& r : e.resets) ce.resets.push_back(resolve_clock(r, ci));
            for (const Update& u : e.updates) {
                CompiledUpdate cu;
                cu.var = resolve_var(u.var, ci);
                cu.expr = compile_expr(u.expr, ci);
                ce.updates.push_back(cu);
            }
            if (e.sync) {
                auto ch = find_channel(e.sync->channel);
                if (!ch) throw ConfigError("unknown channel " + e.sync->channel + " in " + a.name);
                ce.channel = *ch;
                ce.dir = e.sync->dir;
            }
            cc.edges.push_back(std::move(ce));
            } catch (const Error& err) {
                throw ConfigError(a.name + " edge #" + std::to_string(ei) + " (" + e.source +
                                  " -> " + e.target + "): " + err.what());
            }
        }
        for (std::uint32_t ei = 0; ei < cc.edges.size(); ++ei) {
            const CompiledEdge& ce = cc.edges[ei];
            CompiledLocation& src = cc.locations[ce.source];
            src.all_edges.push_back(ei);
            if (ce.channel != kNoId && ce.dir == SyncDir::Receive)
                src.recv_edges[ce.channel].push_back(ei);
            else
                src.act_edges.push_back(ei);
        }
    }
    built_ = true;
}

} // namespace smcnash
