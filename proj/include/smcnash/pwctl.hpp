#pragma once

#include "smcnash/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

namespace smcnash {

// Cost-bounded reachability F[c<=C](phi): some state satisfying phi is
// reached while the observer clock c is still <= C. phi is an and/or tree
// over location atoms, integer-variable comparisons and clock comparisons.
//
// Text syntax, e.g.  F[time<=50](ns>=1 && energy<=3)
// Unqualified names resolve against component 0, then the shared variables;
// "Comp.x" is explicit. A bare name is a location atom, a compared name is a
// variable or clock atom.

enum class PredKind : std::uint8_t { True, False, And, Or, AtLocation, VarCmp, ClockCmp };

struct PredNode {
    PredKind kind = PredKind::True;
    std::vector<std::uint32_t> children;
    std::string name; // atom target as written
    CmpOp op = CmpOp::Le;
    double bound = 0.0; // clock atoms (and parse-time var bounds)
    // resolved:
    ComponentId comp = 0;
    LocationId loc = 0;
    VarId var = 0;
    ClockId clock = 0;
};

enum class MonitorStatus : std::uint8_t { Continue, Satisfied, Violated };

struct Verdict {
    enum class Outcome : std::uint8_t { Satisfied, Violated } outcome = Outcome::Violated;
    double witness_time = 0.0; // global time of first satisfaction
};

class PwctlFormula {
public:
    static PwctlFormula parse(const std::string& text);

    const std::string& text() const { return text_; }
    const std::string& observer_name() const { return observer_name_; }
    double bound() const { return bound_; }
    ClockId observer() const { return observer_; }
    bool resolved() const { return resolved_; }

    // Binds names to the network's symbol tables and checks the observer
    // contract: never reset by any edge, rate >= 1 in every location of its
    // owning component.
    void resolve(const Network& net) {
        auto obs = net.find_clock(observer_name_);
        if (!obs) throw ConfigError("observer clock not found: " + observer_name_);
        observer_ = *obs;
        ComponentId owner = net.clock_owner(observer_);
        const CompiledComponent& oc = net.comps()[owner];
        for (const CompiledEdge& e : oc.edges)
            if (std::find(e.resets.begin(), e.resets.end(), observer_) != e.resets.end())
                throw ConfigError("observer clock " + observer_name_ + " is reset by an edge of " +
                                  oc.name);
        for (const CompiledLocation& l : oc.locations)
            if (l.rates[observer_ - oc.clock_base] < 1)
                throw ConfigError("observer clock " + observer_name_ + " must have rate >= 1 in " +
                                  oc.name + "." + l.name);
        for (PredNode& n : nodes_) resolve_node(net, n);
        resolved_ = true;
    }

    // phi holds and the observer is within bound.
    bool check_state(const Network& net, const SystemState& s) const {
        require_resolved();
        return observer_within(net, s, 0.0) && eval_at(net, s, root_, 0.0);
    }

    // Earliest offset within [0, until] (and within the observer budget) at
    // which phi holds, scanning pre + clock-atom crossing instants. Clocks
    // are linear in time inside the interval, so truth changes only at
    // finitely many computable instants.
    std::optional<double> earliest_satisfaction(const Network& net, const SystemState& pre,
                                                double until) const {
        require_resolved();
        double budget = observer_budget(net, pre);
        if (budget < 0.0) return std::nullopt;
        double limit = std::min(until, budget);

        static thread_local std::vector<double> instants;
        instants.clear();
        instants.push_back(0.0);
        if (limit > 0.0) instants.push_back(limit);
        collect_crossings(net, pre, root_, limit, instants);
        std::sort(instants.begin(), instants.end());
        instants.erase(std::unique(instants.begin(), instants.end()), instants.end());

        for (std::size_t i = 0; i < instants.size(); ++i) {
            if (eval_at(net, pre, root_, instants[i])) return instants[i];
            if (i + 1 < instants.size()) {
                double mid = instants[i] + (instants[i + 1] - instants[i]) / 2.0;
                // Truth is constant on the open interval; the witness is its
                // left endpoint (the infimum).
                if (eval_at(net, pre, root_, mid)) return instants[i];
            }
        }
        return std::nullopt;
    }

    MonitorStatus step(const Network& net, const SystemState& pre, double delay,
                       const SystemState& post, double* witness = nullptr) const {
        if (auto tau = earliest_satisfaction(net, pre, delay)) {
            if (witness) *witness = pre.elapsed + *tau;
            return MonitorStatus::Satisfied;
        }
        if (check_state(net, post)) { // discrete effects at the interval end
            if (witness) *witness = post.elapsed;
            return MonitorStatus::Satisfied;
        }
        if (!observer_within(net, post, 0.0)) return MonitorStatus::Violated;
        return MonitorStatus::Continue;
    }

    // Atom truth at offset tau from s (no observer constraint).
    bool eval_at(const Network& net, const SystemState& s, std::uint32_t node, double tau) const {
        const PredNode& n = nodes_[node];
        switch (n.kind) {
            case PredKind::True: return true;
            case PredKind::False: return false;
            case PredKind::And:
                for (std::uint32_t c : n.children)
                    if (!eval_at(net, s, c, tau)) return false;
                return true;
            case PredKind::Or:
                for (std::uint32_t c : n.children)
                    if (eval_at(net, s, c, tau)) return true;
                return false;
            case PredKind::AtLocation: return s.locations[n.comp] == n.loc;
            case PredKind::VarCmp:
                return cmp_int(s.vars[n.var], n.op, static_cast<std::int64_t>(n.bound));
            case PredKind::ClockCmp: {
                double v = clock_value(net, s, n.clock);
                auto r = static_cast<double>(clock_rate(net, s, n.clock));
                bool upper = n.op == CmpOp::Le || n.op == CmpOp::Lt;
                if (r <= 0.0) return upper ? v <= n.bound : v >= n.bound;
                double t = (n.bound - v) / r;
                return upper ? tau <= t + kTimeSlack : tau >= t - kTimeSlack;
            }
        }
        return false;
    }

    std::uint32_t root() const { return root_; }
    const std::vector<PredNode>& nodes() const { return nodes_; }

    // Clocks the predicate (plus observer) mentions; used by trace dumps.
    std::vector<ClockId> referenced_clocks() const {
        require_resolved();
        std::vector<ClockId> out{observer_};
        for (const PredNode& n : nodes_)
            if (n.kind == PredKind::ClockCmp) out.push_back(n.clock);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    void require_resolved() const {
        if (!resolved_) throw ConfigError("formula used before resolve(): " + text_);
    }

    // Delay until the observer exceeds the bound (negative: already past).
    double observer_budget(const Network& net, const SystemState& s) const {
        double v = clock_value(net, s, observer_);
        auto r = static_cast<double>(clock_rate(net, s, observer_));
        return (bound_ - v) / r + kTimeSlack;
    }

    bool observer_within(const Network& net, const SystemState& s, double tau) const {
        return tau <= observer_budget(net, s);
    }

    void collect_crossings(const Network& net, const SystemState& s, std::uint32_t node,
                           double limit, std::vector<double>& out) const {
        const PredNode& n = nodes_[node];
        if (n.kind == PredKind::And || n.kind == PredKind::Or) {
            for (std::uint32_t c : n.children) collect_crossings(net, s, c, limit, out);
            return;
        }
        if (n.kind != PredKind::ClockCmp) return;
        double v = clock_value(net, s, n.clock);
        auto r = static_cast<double>(clock_rate(net, s, n.clock));
        if (r <= 0.0) return;
        double t = (n.bound - v) / r;
        if (t > 0.0 && t < limit) out.push_back(t);
    }

    void resolve_node(const Network& net, PredNode& n) {
        if (n.kind == PredKind::AtLocation) {
            auto dot = n.name.find('.');
            std::string comp_name = dot == std::string::npos ? net.comps()[0].name
                                                             : n.name.substr(0, dot);
            std::string loc_name = dot == std::string::npos ? n.name : n.name.substr(dot + 1);
            auto comp = net.find_component(comp_name);
            if (!comp) throw ConfigError("unknown component in formula: " + n.name);
            const CompiledComponent& c = net.comps()[*comp];
            for (LocationId li = 0; li < c.locations.size(); ++li) {
                if (c.locations[li].name == loc_name) {
                    n.comp = *comp;
                    n.loc = li;
                    return;
                }
            }
            throw ConfigError("unknown location in formula: " + n.name);
        }
        if (n.kind == PredKind::VarCmp) {
            // A compared name may be a variable or a clock; try both.
            if (auto v = net.find_var(n.name)) {
                double ip;
                if (std::modf(n.bound, &ip) != 0.0)
                    throw ConfigError("variable atom compares against non-integer: " + n.name);
                n.var = *v;
                return;
            }
            if (auto c = net.find_clock(n.name)) {
                if (n.op == CmpOp::Eq || n.op == CmpOp::Ne)
                    throw ConfigError("== and != are not allowed on clocks: " + n.name);
                n.kind = PredKind::ClockCmp;
                n.clock = *c;
                return;
            }
            throw ConfigError("unknown variable or clock in formula: " + n.name);
        }
    }

    friend class FormulaParser;

    std::vector<PredNode> nodes_;
    std::uint32_t root_ = 0;
    std::string observer_name_;
    ClockId observer_ = kNoId;
    double bound_ = 0.0;
    std::string text_;
    bool resolved_ = false;
};

// --------------------------------------------------------------------------

class FormulaParser {
public:
    explicit FormulaParser(const std::string& s) : s_(s) {}

    PwctlFormula parse() {
        PwctlFormula f;
        f.text_ = s_;
        skip_ws();
        expect('F');
        expect('[');
        f.observer_name_ = ident();
        skip_ws();
        if (!(eat('<') && eat('='))) fail("expected <= after observer clock");
        f.bound_ = number();
        if (f.bound_ < 0) fail("observer bound must be nonnegative");
        expect(']');
        expect('(');
        nodes_ = &f.nodes_;
        f.root_ = parse_or();
        expect(')');
        skip_ws();
        if (pos_ != s_.size()) fail("trailing input");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) {
        throw ConfigError("formula parse error at offset " + std::to_string(pos_) + ": " + msg +
                          " in \"" + s_ + "\"");
    }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool eat2(const char* p) {
        skip_ws();
        if (pos_ + 1 < s_.size() && s_[pos_] == p[0] && s_[pos_ + 1] == p[1]) {
            pos_ += 2;
            return true;
        }
        return false;
    }
    std::string ident() {
        skip_ws();
        std::size_t start = pos_;
        auto ok = [&](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
        };
        while (pos_ < s_.size() && ok(s_[pos_])) ++pos_;
        if (pos_ == start) fail("expected identifier");
        return s_.substr(start, pos_ - start);
    }
    double number() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                s_[pos_] == '-' || s_[pos_] == '+'))
            ++pos_;
        if (pos_ == start) fail("expected number");
        return std::stod(s_.substr(start, pos_ - start));
    }

    std::uint32_t add(PredNode n) {
        nodes_->push_back(std::move(n));
        return static_cast<std::uint32_t>(nodes_->size() - 1);
    }

    std::uint32_t parse_or() {
        std::uint32_t first = parse_and();
        std::vector<std::uint32_t> kids{first};
        while (eat2("||")) kids.push_back(parse_and());
        if (kids.size() == 1) return first;
        PredNode n;
        n.kind = PredKind::Or;
        n.children = std::move(kids);
        return add(std::move(n));
    }

    std::uint32_t parse_and() {
        std::uint32_t first = parse_unary();
        std::vector<std::uint32_t> kids{first};
        while (eat2("&&")) kids.push_back(parse_unary());
        if (kids.size() == 1) return first;
        PredNode n;
        n.kind = PredKind::And;
        n.children = std::move(kids);
        return add(std::move(n));
    }

    std::uint32_t parse_unary() {
        if (eat('(')) {
            std::uint32_t inner = parse_or();
            expect(')');
            return inner;
        }
        std::string name = ident();
        if (name == "true") return add(PredNode{});
        if (name == "false") {
            PredNode n;
            n.kind = PredKind::False;
            return add(std::move(n));
        }
        skip_ws();
        std::optional<CmpOp> op;
        if (eat2("<=")) op = CmpOp::Le;
        else if (eat2(">=")) op = CmpOp::Ge;
        else if (eat2("==")) op = CmpOp::Eq;
        else if (eat2("!=")) op = CmpOp::Ne;
        else if (eat('<')) op = CmpOp::Lt;
        else if (eat('>')) op = CmpOp::Gt;
        PredNode n;
        if (!op) {
            n.kind = PredKind::AtLocation;
            n.name = name;
        } else {
            n.kind = PredKind::VarCmp; // may become ClockCmp at resolve time
            n.name = name;
            n.op = *op;
            n.bound = number();
        }
        return add(std::move(n));
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    std::vector<PredNode>* nodes_ = nullptr;
};

inline PwctlFormula PwctlFormula::parse(const std::string& text) {
    return FormulaParser(text).parse();
}

// Spec-level free function: verdict of one monitor step.
inline MonitorStatus monitor_step(const Network& net, const PwctlFormula& f,
                                  const SystemState& pre, double delay, const SystemState& post,
                                  double* witness = nullptr) {
    return f.step(net, pre, delay, post, witness);
}

inline bool check_state(const Network& net, const PwctlFormula& f, const SystemState& s) {
    return f.check_state(net, s);
}

// StopCondition adapter: halts the simulation at the first verdict. The
// observer clock's rate >= 1 guarantees termination; runs cut off by the
// step cap are tallied by the caller as violated.
class PwctlMonitor : public StopCondition {
public:
    PwctlMonitor(const Network& net, const PwctlFormula& f) : f_(f) {
        if (!f.resolved()) throw ConfigError("formula must be resolved against the network");
        (void)net;
    }

    Decision on_initial(const Network& net, const SystemState& s) override {
        if (f_.check_state(net, s)) {
            verdict_ = Verdict{Verdict::Outcome::Satisfied, s.elapsed};
            return Decision::Satisfied;
        }
        return Decision::Continue;
    }

    Decision on_step(const Network& net, const SystemState& pre, double delay,
                     const SystemState& post) override {
        double witness = 0.0;
        switch (f_.step(net, pre, delay, post, &witness)) {
            case MonitorStatus::Satisfied:
                verdict_ = Verdict{Verdict::Outcome::Satisfied, witness};
                return Decision::Satisfied;
            case MonitorStatus::Violated:
                verdict_ = Verdict{Verdict::Outcome::Violated, post.elapsed};
                return Decision::Violated;
            case MonitorStatus::Continue: return Decision::Continue;
        }
        return Decision::Continue;
    }

    double divergence_horizon(const Network& net, const SystemState& s) override {
        // Far enough for the observer (rate >= 1) to exceed the bound, so the
        // fast-forwarded interval is guaranteed to produce a verdict.
        double v = clock_value(net, s, f_.observer());
        auto r = static_cast<double>(clock_rate(net, s, f_.observer()));
        return std::max((f_.bound() - v) / r, 0.0) + 1.0;
    }

    const std::optional<Verdict>& verdict() const { return verdict_; }

private:
    const PwctlFormula& f_;
    std::optional<Verdict> verdict_;
};

inline PwctlMonitor as_stop_condition(const Network& net, const PwctlFormula& f) {
    return PwctlMonitor(net, f);
}

} // namespace smcnash
