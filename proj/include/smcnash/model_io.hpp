#pragma once

#include "smcnash/pwctl.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace smcnash {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Tiny parsers for the textual guard/update syntax used in model files:
//   guard:  "x>=1 && nt==0"   (conjunction only; atom lhs decides clock/var)
//   update: "nt = nt + 1"
//   expr:   integers, variable names, + - *, parentheses
// ---------------------------------------------------------------------------

class ExprParser {
public:
    explicit ExprParser(const std::string& s) : s_(s) {}

    IntExpr parse() {
        IntExpr e = sum();
        skip();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

    IntExpr parse_prefix(std::size_t* end) {
        IntExpr e = sum();
        *end = pos_;
        return e;
    }

private:
    [[noreturn]] void fail(const std::string& m) {
        throw ConfigError("expression parse error in \"" + s_ + "\": " + m);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }
    IntExpr sum() {
        IntExpr e = product();
        for (;;) {
            if (eat('+')) e = IntExpr::binary(IntExpr::Kind::Add, std::move(e), product());
            else if (eat('-')) e = IntExpr::binary(IntExpr::Kind::Sub, std::move(e), product());
            else return e;
        }
    }
    IntExpr product() {
        IntExpr e = factor();
        while (eat('*')) e = IntExpr::binary(IntExpr::Kind::Mul, std::move(e), factor());
        return e;
    }
    IntExpr factor() {
        skip();
        if (eat('(')) {
            IntExpr e = sum();
            if (!eat(')')) fail("expected )");
            return e;
        }
        if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            return IntExpr::constant(std::stoll(s_.substr(start, pos_ - start)));
        }
        std::size_t start = pos_;
        auto ok = [&](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
        };
        while (pos_ < s_.size() && ok(s_[pos_])) ++pos_;
        if (pos_ == start) fail("expected term");
        return IntExpr::variable(s_.substr(start, pos_ - start));
    }

    const std::string& s_;
    std::size_t pos_ = 0;
};

inline std::string expr_to_string(const IntExpr& e) {
    switch (e.kind) {
        case IntExpr::Kind::Const: return std::to_string(e.value);
        case IntExpr::Kind::Var: return e.var;
        case IntExpr::Kind::Add: return "(" + expr_to_string(*e.lhs) + " + " + expr_to_string(*e.rhs) + ")";
        case IntExpr::Kind::Sub: return "(" + expr_to_string(*e.lhs) + " - " + expr_to_string(*e.rhs) + ")";
        case IntExpr::Kind::Mul: return "(" + expr_to_string(*e.lhs) + " * " + expr_to_string(*e.rhs) + ")";
    }
    return "0";
}

namespace detail {

inline std::pair<CmpOp, std::size_t> read_cmp(const std::string& s, std::size_t pos) {
    auto two = [&](const char* p) {
        return pos + 1 < s.size() && s[pos] == p[0] && s[pos + 1] == p[1];
    };
    if (two("<=")) return {CmpOp::Le, pos + 2};
    if (two(">=")) return {CmpOp::Ge, pos + 2};
    if (two("==")) return {CmpOp::Eq, pos + 2};
    if (two("!=")) return {CmpOp::Ne, pos + 2};
    if (pos < s.size() && s[pos] == '<') return {CmpOp::Lt, pos + 1};
    if (pos < s.size() && s[pos] == '>') return {CmpOp::Gt, pos + 1};
    throw ConfigError("expected comparison operator in \"" + s + "\"");
}

inline bool is_clock_name(const Automaton& a, const IntExpr& e) {
    if (e.kind != IntExpr::Kind::Var) return false;
    for (const ClockDecl& c : a.clocks)
        if (c.name == e.var) return true;
    return false;
}

} // namespace detail

// Parses a conjunction "atom && atom && ..." into a Guard, classifying each
// atom as a clock bound or a variable comparison by the component's declared
// clocks.
inline Guard parse_guard(const Automaton& a, const std::string& text) {
    Guard g;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find("&&", pos);
        std::string atom = text.substr(pos, next == std::string::npos ? next : next - pos);
        pos = next == std::string::npos ? text.size() : next + 2;

        // trim
        std::size_t b = atom.find_first_not_of(" \t");
        std::size_t e = atom.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        atom = atom.substr(b, e - b + 1);
        if (atom == "true") continue;

        std::size_t lhs_end = 0;
        ExprParser lp(atom);
        IntExpr lhs = lp.parse_prefix(&lhs_end);
        auto [op, rhs_start] = detail::read_cmp(atom, lhs_end);
        std::string rhs_text = atom.substr(rhs_start);
        IntExpr rhs = ExprParser(rhs_text).parse();

        if (detail::is_clock_name(a, lhs)) {
            if (rhs.kind != IntExpr::Kind::Const)
                throw ConfigError("clock bound must compare against an integer constant: " + atom);
            g.clocks.push_back({lhs.var, op, rhs.value});
        } else {
            g.vars.push_back({std::move(lhs), op, std::move(rhs)});
        }
    }
    return g;
}

inline std::string guard_to_string(const Guard& g) {
    std::string out;
    auto append = [&](const std::string& s) {
        if (!out.empty()) out += " && ";
        out += s;
    };
    for (const AtomicBound& b : g.clocks)
        append(b.clock + to_string(b.op) + std::to_string(b.bound));
    for (const VarCompare& v : g.vars)
        append(expr_to_string(v.lhs) + to_string(v.op) + expr_to_string(v.rhs));
    return out.empty() ? "true" : out;
}

inline Update parse_update(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("update must look like \"var = expr\": " + text);
    std::string lhs = text.substr(0, eq);
    std::size_t b = lhs.find_first_not_of(" \t");
    std::size_t e = lhs.find_last_not_of(" \t");
    if (b == std::string::npos) throw ConfigError("empty update target: " + text);
    return {lhs.substr(b, e - b + 1), ExprParser(text.substr(eq + 1)).parse()};
}

// ---------------------------------------------------------------------------
// JSON model format
// ---------------------------------------------------------------------------

inline json var_to_json(const VarDecl& v) {
    return json{{"name", v.name}, {"init", v.init}, {"min", v.min}, {"max", v.max}};
}

inline VarDecl var_from_json(const json& j) {
    VarDecl v;
    v.name = j.at("name").get<std::string>();
    v.init = j.value("init", 0);
    if (j.contains("min")) v.min = j.at("min").get<std::int64_t>();
    if (j.contains("max")) v.max = j.at("max").get<std::int64_t>();
    return v;
}

inline json network_to_json(const Network& net) {
    json j;
    j["format_version"] = kFormatVersion;
    j["name"] = net.name;
    j["channels"] = net.channels;
    json sv = json::array();
    for (const VarDecl& v : net.shared_vars) sv.push_back(var_to_json(v));
    j["shared_vars"] = sv;

    json comps = json::array();
    for (const Automaton& a : net.components) {
        json ja;
        ja["name"] = a.name;
        ja["initial"] = a.initial;
        json clocks = json::array();
        for (const ClockDecl& c : a.clocks) clocks.push_back(c.name);
        ja["clocks"] = clocks;
        json vars = json::array();
        for (const VarDecl& v : a.vars) vars.push_back(var_to_json(v));
        ja["vars"] = vars;
        if (!a.params.empty()) ja["params"] = a.params;

        json locs = json::array();
        for (const Location& l : a.locations) {
            json jl;
            jl["name"] = l.name;
            json inv = json::array();
            for (const AtomicBound& b : l.invariant)
                inv.push_back(b.clock + to_string(b.op) + std::to_string(b.bound));
            if (!inv.empty()) jl["invariant"] = inv;
            if (!l.rates.empty()) jl["rates"] = l.rates;
            if (l.urgent) jl["urgent"] = true;
            if (l.exp_rate) jl["exp_rate"] = *l.exp_rate;
            locs.push_back(jl);
        }
        ja["locations"] = locs;

        json edges = json::array();
        for (const Edge& e : a.edges) {
            json je;
            je["from"] = e.source;
            je["to"] = e.target;
            std::string g = guard_to_string(e.guard);
            if (g != "true") je["guard"] = g;
            if (!e.resets.empty()) je["resets"] = e.resets;
            if (!e.updates.empty()) {
                json ups = json::array();
                for (const Update& u : e.updates) ups.push_back(u.var + " = " + expr_to_string(u.expr));
                je["updates"] = ups;
            }
            if (e.sync) je["sync"] = e.sync->channel + (e.sync->dir == SyncDir::Emit ? "!" : "?");
            if (e.weight != 1.0) je["weight"] = e.weight;
            edges.push_back(je);
        }
        ja["edges"] = edges;
        comps.push_back(ja);
    }
    j["components"] = comps;
    return j;
}

inline Network network_from_json(const json& j) {
    if (!j.contains("format_version"))
        throw ConfigError("model file is missing format_version");
    int v = j.at("format_version").get<int>();
    if (v != kFormatVersion)
        throw ConfigError("unsupported format_version " + std::to_string(v));
    Network net;
    net.name = j.value("name", "network");
    if (j.contains("channels")) net.channels = j.at("channels").get<std::vector<std::string>>();
    if (j.contains("shared_vars"))
        for (const json& jv : j.at("shared_vars")) net.shared_vars.push_back(var_from_json(jv));

    for (const json& ja : j.at("components")) {
        Automaton a;
        a.name = ja.at("name").get<std::string>();
        a.initial = ja.at("initial").get<std::string>();
        if (ja.contains("clocks"))
            for (const json& jc : ja.at("clocks")) a.clocks.push_back({jc.get<std::string>()});
        if (ja.contains("vars"))
            for (const json& jv : ja.at("vars")) a.vars.push_back(var_from_json(jv));
        if (ja.contains("params"))
            a.params = ja.at("params").get<std::map<std::string, double>>();

        for (const json& jl : ja.at("locations")) {
            Location l;
            l.name = jl.at("name").get<std::string>();
            if (jl.contains("invariant")) {
                for (const json& ji : jl.at("invariant")) {
                    Guard g = parse_guard(a, ji.get<std::string>());
                    if (g.clocks.size() != 1 || !g.vars.empty())
                        throw ConfigError("invariant entries must be single clock bounds: " +
                                          ji.get<std::string>());
                    l.invariant.push_back(g.clocks[0]);
                }
            }
            if (jl.contains("rates"))
                l.rates = jl.at("rates").get<std::map<std::string, std::int64_t>>();
            l.urgent = jl.value("urgent", false);
            if (jl.contains("exp_rate")) l.exp_rate = jl.at("exp_rate").get<double>();
            a.locations.push_back(std::move(l));
        }
        for (const json& je : ja.at("edges")) {
            Edge e;
            e.source = je.at("from").get<std::string>();
            e.target = je.at("to").get<std::string>();
            if (je.contains("guard")) e.guard = parse_guard(a, je.at("guard").get<std::string>());
            if (je.contains("resets")) e.resets = je.at("resets").get<std::vector<std::string>>();
            if (je.contains("updates"))
                for (const json& ju : je.at("updates"))
                    e.updates.push_back(parse_update(ju.get<std::string>()));
            if (je.contains("sync")) {
                std::string s = je.at("sync").get<std::string>();
                if (s.empty() || (s.back() != '!' && s.back() != '?'))
                    throw ConfigError("sync must end with ! or ?: " + s);
                e.sync = Sync{s.substr(0, s.size() - 1),
                              s.back() == '!' ? SyncDir::Emit : SyncDir::Receive};
            }
            e.weight = je.value("weight", 1.0);
            a.edges.push_back(std::move(e));
        }
        net.components.push_back(std::move(a));
    }
    net.build();
    return net;
}

inline std::string network_to_string(const Network& net) {
    return network_to_json(net).dump(2) + "\n";
}

inline Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open model file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("model file " + path + " is not valid JSON: " + e.what());
    }
    try {
        return network_from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError("model file " + path + ": " + e.what());
    }
}

inline void save_network(const Network& net, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model file: " + path);
    out << network_to_string(net);
}

// ---------------------------------------------------------------------------
// Run trace: one line per step with end-of-interval (pre-edge) clock values
// and the post-edge snapshot, precise enough for an offline verdict re-scan.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string clocks_csv(const Network& net, const SystemState& s) {
    std::string out;
    for (ClockId c = 0; c < net.n_clocks(); ++c) {
        if (c) out += ",";
        out += net.clock_name(c) + "=" + fmt_double(clock_value(net, s, c));
    }
    return out;
}

inline std::string vars_csv(const Network& net, const std::vector<std::int64_t>& vars) {
    std::string out;
    for (VarId v = 0; v < net.n_vars(); ++v) {
        if (v) out += ",";
        out += net.var_name(v) + "=" + std::to_string(vars[v]);
    }
    return out.empty() ? "-" : out;
}

inline std::string locs_csv(const Network& net, const SystemState& s) {
    std::string out;
    for (ComponentId ci = 0; ci < net.comps().size(); ++ci) {
        if (ci) out += ",";
        out += net.comps()[ci].locations[s.locations[ci]].name;
    }
    return out;
}

} // namespace detail

inline std::string write_trace(const Network& net, const Run& run) {
    std::ostringstream os;
    os << "# smcnash-trace v1 model=" << net.name << "\n";
    os << "init elapsed=" << detail::fmt_double(run.initial.elapsed)
       << " locs=" << detail::locs_csv(net, run.initial)
       << " vars=" << detail::vars_csv(net, run.initial.vars)
       << " clocks=" << detail::clocks_csv(net, run.initial) << "\n";
    SystemState cursor = run.initial;
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
        const RunStep& st = run.steps[i];
        // End-of-interval values: advance the cursor by the delay only.
        SystemState atEnd = cursor;
        atEnd.elapsed += st.delay;
        os << "step " << (i + 1) << " delay=" << detail::fmt_double(st.delay)
           << " fired=" << (st.fired ? label_of(net, *st.fired) : std::string("-"))
           << " end=" << detail::clocks_csv(net, atEnd)
           << " elapsed=" << detail::fmt_double(st.post.elapsed)
           << " locs=" << detail::locs_csv(net, st.post)
           << " vars=" << detail::vars_csv(net, st.post.vars)
           << " clocks=" << detail::clocks_csv(net, st.post) << "\n";
        cursor = st.post;
    }
    std::string outcome = run.outcome == Run::Outcome::Satisfied ? "satisfied"
                        : run.outcome == Run::Outcome::Violated  ? "violated"
                        : run.outcome == Run::Outcome::Halted    ? "halted"
                                                                 : "truncated";
    os << "outcome " << outcome;
    if (!run.truncation_reason.empty()) os << " reason=" << run.truncation_reason;
    os << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Offline re-scan of a dumped trace. Deliberately independent of the online
// monitor's implementation: clock trajectories are reconstructed by linear
// interpolation between the dumped values, not from anchors and rates, and
// all comparisons happen in the value domain.
// ---------------------------------------------------------------------------

namespace detail {

struct TraceSnapshot {
    double elapsed = 0.0;
    std::vector<std::string> locs;
    std::unordered_map<std::string, std::int64_t> vars;
    std::unordered_map<std::string, double> clocks;
};

struct TraceStep {
    double delay = 0.0;
    std::unordered_map<std::string, double> end_clocks; // before the edge
    TraceSnapshot post;
};

// Tokens are space-separated key=value pairs; values never contain spaces
// (edge labels use Comp:A->B[chan!] form). Bare tokens are ignored.
inline std::unordered_map<std::string, std::string> parse_kv_line(const std::string& line) {
    std::unordered_map<std::string, std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

inline void parse_csv_doubles(const std::string& s, std::unordered_map<std::string, double>& out) {
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        pos = comma == std::string::npos ? s.size() : comma + 1;
        auto eq = item.find('=');
        if (eq != std::string::npos) out[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    }
}

inline void parse_csv_ints(const std::string& s, std::unordered_map<std::string, std::int64_t>& out) {
    if (s == "-") return;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string item = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        pos = comma == std::string::npos ? s.size() : comma + 1;
        auto eq = item.find('=');
        if (eq != std::string::npos) out[item.substr(0, eq)] = std::stoll(item.substr(eq + 1));
    }
}

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        out.push_back(s.substr(pos, comma == std::string::npos ? comma : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

inline TraceSnapshot parse_snapshot(const std::unordered_map<std::string, std::string>& kv,
                                    const char* clock_key) {
    TraceSnapshot snap;
    snap.elapsed = std::stod(kv.at("elapsed"));
    snap.locs = split_csv(kv.at("locs"));
    parse_csv_ints(kv.at("vars"), snap.vars);
    parse_csv_doubles(kv.at(clock_key), snap.clocks);
    return snap;
}

// Truth of one formula atom against a snapshot (post-edge or instant view).
inline bool offline_atom_truth(const Network& net, const PwctlFormula& f, const PredNode& n,
                               const TraceSnapshot& snap, double clock_override_tau,
                               const std::unordered_map<std::string, double>* pre_clocks,
                               const std::unordered_map<std::string, double>* end_clocks,
                               double delay) {
    switch (n.kind) {
        case PredKind::True: return true;
        case PredKind::False: return false;
        case PredKind::AtLocation:
            return snap.locs[n.comp] == net.comps()[n.comp].locations[n.loc].name;
        case PredKind::VarCmp:
            return cmp_int(snap.vars.at(net.var_name(n.var)), n.op,
                           static_cast<std::int64_t>(n.bound));
        case PredKind::ClockCmp: {
            const std::string& name = net.clock_name(n.clock);
            double v;
            if (pre_clocks) {
                double v0 = pre_clocks->at(name);
                double v1 = end_clocks->at(name);
                v = delay > 0.0 ? v0 + (v1 - v0) * (clock_override_tau / delay) : v1;
            } else {
                v = snap.clocks.at(name);
            }
            double tol = kTimeSlack * std::max(1.0, std::abs(n.bound));
            bool upper = n.op == CmpOp::Le || n.op == CmpOp::Lt;
            return upper ? v <= n.bound + tol : v >= n.bound - tol;
        }
        default: return false;
    }
}

inline bool offline_pred_truth(const Network& net, const PwctlFormula& f, std::uint32_t node,
                               const TraceSnapshot& snap, double tau,
                               const std::unordered_map<std::string, double>* pre_clocks,
                               const std::unordered_map<std::string, double>* end_clocks,
                               double delay) {
    const PredNode& n = f.nodes()[node];
    if (n.kind == PredKind::And) {
        for (std::uint32_t c : n.children)
            if (!offline_pred_truth(net, f, c, snap, tau, pre_clocks, end_clocks, delay))
                return false;
        return true;
    }
    if (n.kind == PredKind::Or) {
        for (std::uint32_t c : n.children)
            if (offline_pred_truth(net, f, c, snap, tau, pre_clocks, end_clocks, delay))
                return true;
        return false;
    }
    return offline_atom_truth(net, f, n, snap, tau, pre_clocks, end_clocks, delay);
}

} // namespace detail

enum class OfflineOutcome : std::uint8_t { Satisfied, Violated, NoVerdict };

inline OfflineOutcome offline_scan_trace(const Network& net, const PwctlFormula& f,
                                         const std::string& trace_text) {
    using namespace detail;
    std::istringstream in(trace_text);
    std::string line;
    TraceSnapshot pre;
    bool have_pre = false;
    const std::string obs_name = net.clock_name(f.observer());

    auto linear_crossings = [&](const std::unordered_map<std::string, double>& pc,
                                const std::unordered_map<std::string, double>& ec, double delay,
                                double limit, std::vector<double>& inst) {
        for (const PredNode& n : f.nodes()) {
            if (n.kind != PredKind::ClockCmp) continue;
            const std::string& name = net.clock_name(n.clock);
            double v0 = pc.at(name), v1 = ec.at(name);
            if (v1 == v0) continue;
            double t = delay * (n.bound - v0) / (v1 - v0);
            if (t > 0.0 && t < limit) inst.push_back(t);
        }
    };

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (line.rfind("init ", 0) == 0) {
            pre = parse_snapshot(parse_kv_line(line), "clocks");
            have_pre = true;
            // check the very first instant
            if (pre.clocks.at(obs_name) <= f.bound() + kTimeSlack &&
                offline_pred_truth(net, f, f.root(), pre, 0.0, nullptr, nullptr, 0.0))
                return OfflineOutcome::Satisfied;
            continue;
        }
        if (line.rfind("step ", 0) == 0) {
            if (!have_pre) throw ConfigError("trace step before init line");
            auto kv = parse_kv_line(line);
            TraceStep st;
            st.delay = std::stod(kv.at("delay"));
            parse_csv_doubles(kv.at("end"), st.end_clocks);
            st.post = parse_snapshot(kv, "clocks");

            // Interval: clocks interpolate linearly from pre to end;
            // vars/locations are the pre snapshot.
            double v0 = pre.clocks.at(obs_name), v1 = st.end_clocks.at(obs_name);
            double limit = st.delay;
            if (v1 > f.bound()) {
                limit = v1 == v0 ? 0.0 : st.delay * (f.bound() - v0) / (v1 - v0) + kTimeSlack;
                limit = std::max(0.0, std::min(limit, st.delay));
            }
            if (v0 <= f.bound() + kTimeSlack) {
                std::vector<double> inst{0.0};
                if (limit > 0.0) inst.push_back(limit);
                linear_crossings(pre.clocks, st.end_clocks, st.delay, limit, inst);
                std::sort(inst.begin(), inst.end());
                inst.erase(std::unique(inst.begin(), inst.end()), inst.end());
                for (std::size_t i = 0; i < inst.size(); ++i) {
                    if (offline_pred_truth(net, f, f.root(), pre, inst[i], &pre.clocks,
                                           &st.end_clocks, st.delay))
                        return OfflineOutcome::Satisfied;
                    if (i + 1 < inst.size()) {
                        double mid = inst[i] + (inst[i + 1] - inst[i]) / 2.0;
                        if (offline_pred_truth(net, f, f.root(), pre, mid, &pre.clocks,
                                               &st.end_clocks, st.delay))
                            return OfflineOutcome::Satisfied;
                    }
                }
            }
            // Post-edge snapshot.
            if (st.post.clocks.at(obs_name) <= f.bound() + kTimeSlack &&
                offline_pred_truth(net, f, f.root(), st.post, 0.0, nullptr, nullptr, 0.0))
                return OfflineOutcome::Satisfied;
            if (st.post.clocks.at(obs_name) > f.bound() + kTimeSlack)
                return OfflineOutcome::Violated;
            pre = st.post;
            continue;
        }
        if (line.rfind("outcome ", 0) == 0) break;
    }
    return OfflineOutcome::NoVerdict;
}

} // namespace smcnash
