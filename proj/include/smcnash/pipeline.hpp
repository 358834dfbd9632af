#pragma once

#include "smcnash/certify.hpp"
#include "smcnash/search.hpp"

#include <chrono>
#include <iomanip>

namespace smcnash {

struct PipelineOptions {
    double d = 0.9;              // pruning threshold
    std::uint32_t n1 = 10'000;   // simulations per pair, search phase
    std::uint32_t n2 = 100'000;  // simulations per pair, evaluation phase
    double alpha = 0.05;
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::string cache_path; // optional persistent estimation cache
    std::size_t max_steps = 1'000'000;
};

struct AnalysisReport {
    // configuration echo
    std::string model;
    unsigned players = 0;
    unsigned coalition_size = 0;
    std::string goal;
    StrategySpace grid;
    double d = 0.9;
    std::uint32_t n1 = 0, n2 = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::uint64_t fingerprint = 0;

    // phase 1: best candidate
    std::optional<double> candidate;
    double candidate_worst_ratio = 0.0;
    std::vector<UtilityEstimate> diagonals;
    std::size_t pairs_estimated = 0;
    std::string no_candidate_hint;

    // symmetric optimum (diagonal argmax at n1)
    double p_opt = 0.0;
    double p_opt_utility = 0.0;

    // phase 2: certification with fresh estimates
    std::vector<UtilityEstimate> evaluation;
    std::optional<EvaluationResult> certification;
    std::string certification_error;

    // wall time is informational only and deliberately kept out of the
    // serialized report so reruns at different worker counts byte-match
    double wall_seconds = 0.0;
};

// Cache-backed utility oracle over strategy indices.
class CachedEstimator {
public:
    CachedEstimator(const GameConfig& cfg, EstimationCache& cache, std::uint32_t n,
                    std::uint64_t dom, EstimateOptions opt)
        : cfg_(cfg), cache_(cache), n_(n), dom_(dom), opt_(opt) {}

    UtilityEstimate operator()(std::size_t i_dev, std::size_t i_com) {
        double pd = cfg_.strategies.values[i_dev];
        double pc = cfg_.strategies.values[i_com];
        if (auto hit = cache_.get(dom_, pd, pc, n_)) return *hit;
        UtilityEstimate e = estimate_utility(cfg_, pd, pc, n_, cache_.base_seed(), dom_, opt_);
        cache_.put(dom_, e);
        return e;
    }

private:
    const GameConfig& cfg_;
    EstimationCache& cache_;
    std::uint32_t n_;
    std::uint64_t dom_;
    EstimateOptions opt_;
};

// Two-phase analysis: candidate search with pruning at n1, then statistical
// certification of the candidate with fresh estimates at n2, plus the
// symmetric-optimal strategy read off the diagonal. Deterministic for a
// fixed seed at any worker count: simulations are parallelized inside each
// pair estimate while the decision sequence stays sequential.
inline AnalysisReport run_pipeline(const GameConfig& cfg, const PipelineOptions& opt) {
    auto t0 = std::chrono::steady_clock::now();

    AnalysisReport rep;
    rep.model = cfg.model_name;
    rep.players = cfg.players;
    rep.coalition_size = cfg.coalition_size;
    rep.goal = cfg.goal_text;
    rep.grid = cfg.strategies;
    rep.d = opt.d;
    rep.n1 = opt.n1;
    rep.n2 = opt.n2;
    rep.alpha = opt.alpha;
    rep.seed = opt.seed;
    rep.fingerprint = cfg.fingerprint();

    WorkerPool pool(opt.workers);
    EstimationCache cache(rep.fingerprint, opt.seed);
    if (!opt.cache_path.empty()) cache.attach_file(opt.cache_path);
    EstimateOptions eopt;
    eopt.max_steps = opt.max_steps;
    eopt.pool = &pool;

    // Phase 1.
    CachedEstimator oracle(cfg, cache, opt.n1, domain::kSearch, eopt);
    RngStream decisions(opt.seed, domain::kSearchDecisions);
    SearchReport search = find_candidate(cfg.strategies, oracle, opt.d, decisions);
    rep.diagonals = search.diagonals;
    rep.pairs_estimated = search.pairs_estimated;

    std::size_t opt_idx = 0;
    for (std::size_t i = 1; i < rep.diagonals.size(); ++i)
        if (rep.diagonals[i].estimate() > rep.diagonals[opt_idx].estimate()) opt_idx = i;
    rep.p_opt = cfg.strategies.values[opt_idx];
    rep.p_opt_utility = rep.diagonals[opt_idx].estimate();

    if (!search.result) {
        std::ostringstream os;
        os << "no candidate survived pruning at d = " << opt.d << "; retry with d = " << opt.d / 2
           << " (cached estimates are reused)";
        rep.no_candidate_hint = os.str();
        rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    }
    rep.candidate = search.result->value;
    rep.candidate_worst_ratio = search.result->worst_ratio;

    // Phase 2: fresh estimates for the whole column of the candidate,
    // including the candidate itself, with an independent stream domain.
    CachedEstimator fresh(cfg, cache, opt.n2, domain::kEvaluate, eopt);
    std::size_t cand_idx = search.result->index;
    EvaluationInput in;
    in.candidate = search.result->value;
    in.n = opt.n2;
    in.alpha = opt.alpha;
    for (std::size_t i = 0; i < cfg.strategies.size(); ++i) {
        UtilityEstimate e = fresh(i, cand_idx);
        rep.evaluation.push_back(e);
        in.deviations.emplace_back(cfg.strategies.values[i], e.estimate());
        if (i == cand_idx) in.diag = e.estimate();
    }
    try {
        rep.certification = certify_delta(in);
    } catch (const InsufficientSimulations& e) {
        rep.certification_error = e.what();
    }

    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// Exports. All serialized artifacts are deterministic functions of the
// report/cache contents (stable ordering, fixed formatting, no timestamps).
// ---------------------------------------------------------------------------

inline json estimate_to_json(const UtilityEstimate& e) {
    return json{{"p_deviant", e.p_deviant}, {"p_common", e.p_common},     {"k", e.k},
                {"n", e.n},                 {"truncations", e.truncations}, {"estimate", e.estimate()}};
}

inline json report_to_json(const AnalysisReport& r) {
    json j;
    j["model"] = r.model;
    j["players"] = r.players;
    j["coalition_size"] = r.coalition_size;
    j["goal"] = r.goal;
    j["grid"] = json{{"label", r.grid.label}, {"values", r.grid.values}};
    j["d"] = r.d;
    j["n1"] = r.n1;
    j["n2"] = r.n2;
    j["alpha"] = r.alpha;
    j["seed"] = r.seed;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(r.fingerprint));
    j["fingerprint"] = buf;
    j["pairs_estimated"] = r.pairs_estimated;

    json diags = json::array();
    for (const UtilityEstimate& e : r.diagonals) diags.push_back(estimate_to_json(e));
    j["diagonals"] = diags;
    j["symmetric_optimum"] = json{{"strategy", r.p_opt}, {"utility", r.p_opt_utility}};

    if (r.candidate) {
        j["candidate"] = json{{"strategy", *r.candidate}, {"worst_ratio", r.candidate_worst_ratio}};
    } else {
        j["candidate"] = nullptr;
        j["no_candidate_hint"] = r.no_candidate_hint;
    }

    if (!r.evaluation.empty()) {
        json evals = json::array();
        for (const UtilityEstimate& e : r.evaluation) evals.push_back(estimate_to_json(e));
        j["evaluation"] = evals;
    }
    if (r.certification) {
        const EvaluationResult& c = *r.certification;
        j["delta"] = json{{"certified", c.delta},
                          {"bracket_hi", c.delta_hi},
                          {"f_at_delta", c.f_at_delta},
                          {"capped", c.capped}};
    } else if (!r.certification_error.empty()) {
        j["certification_error"] = r.certification_error;
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << content;
}

// Full estimated surface of one stream domain as CSV, one row per cached
// pair, ordered by (p_deviant, p_common).
inline std::string surface_csv(const EstimationCache& cache, std::uint64_t dom) {
    std::ostringstream os;
    os << "p_deviant,p_common,k,n,estimate\n";
    for (const auto& [key, e] : cache.entries()) {
        if (std::get<0>(key) != dom) continue;
        os << detail::fmt_double(e.p_deviant) << "," << detail::fmt_double(e.p_common) << ","
           << e.k << "," << e.n << "," << detail::fmt_double(e.estimate()) << "\n";
    }
    return os.str();
}

// Report as field,value rows (one row per table field).
inline std::string report_csv(const AnalysisReport& r) {
    std::ostringstream os;
    os << "field,value\n";
    os << "model," << r.model << "\n";
    os << "players," << r.players << "\n";
    os << "coalition_size," << r.coalition_size << "\n";
    os << "candidate," << (r.candidate ? detail::fmt_double(*r.candidate) : "none") << "\n";
    os << "candidate_worst_ratio," << detail::fmt_double(r.candidate_worst_ratio) << "\n";
    if (r.certification) {
        os << "delta," << detail::fmt_double(r.certification->delta) << "\n";
    } else {
        os << "delta,none\n";
    }
    std::size_t cand_idx = r.candidate ? r.grid.index_of(*r.candidate) : 0;
    os << "utility_at_candidate,"
       << (r.candidate ? detail::fmt_double(r.evaluation.empty()
                                                ? r.diagonals[cand_idx].estimate()
                                                : r.evaluation[cand_idx].estimate())
                       : "none")
       << "\n";
    os << "symmetric_optimum," << detail::fmt_double(r.p_opt) << "\n";
    os << "utility_at_optimum," << detail::fmt_double(r.p_opt_utility) << "\n";
    os << "pairs_estimated," << r.pairs_estimated << "\n";
    os << "alpha," << detail::fmt_double(r.alpha) << "\n";
    os << "d," << detail::fmt_double(r.d) << "\n";
    os << "n1," << r.n1 << "\n";
    os << "n2," << r.n2 << "\n";
    os << "seed," << r.seed << "\n";
    return os.str();
}

// Binned histogram of the certified deltas from a validity experiment.
inline std::string validity_histogram_csv(const ValidityStats& stats, std::size_t bins = 40) {
    double lo = kInf, hi = -kInf;
    for (double d : stats.deltas) {
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (!(hi > lo)) hi = lo + 1e-9;
    double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double d : stats.deltas) {
        auto b = static_cast<std::size_t>((d - lo) / width);
        counts[std::min(b, bins - 1)]++;
    }
    std::ostringstream os;
    os << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < bins; ++b)
        os << detail::fmt_double(lo + width * static_cast<double>(b)) << ","
           << detail::fmt_double(lo + width * static_cast<double>(b + 1)) << "," << counts[b]
           << "\n";
    return os.str();
}

} // namespace smcnash
