#pragma once

#include "smcnash/estimate.hpp"

#include <map>
#include <set>

namespace smcnash {

// Ratio U(k,k)/U(i,k) with the documented zero conventions: a deviation with
// estimated utility 0 cannot be profitable, so its ratio is +inf (0/0
// included).
inline double utility_ratio(double diag, double dev) {
    if (dev == 0.0) return kInf;
    return diag / dev;
}

struct CandidateResult {
    std::size_t index = 0;       // best strategy
    double value = 0.0;
    double worst_ratio = 0.0;    // min over deviations of diag/dev (1.0 when |P| = 1)
    std::map<std::size_t, double> candidate_ratios; // every surviving candidate's min ratio
};

struct SearchReport {
    std::optional<CandidateResult> result; // nullopt: every strategy was pruned
    std::vector<UtilityEstimate> diagonals;
    std::map<std::size_t, std::size_t> prune_witness; // pruned k -> deviation i that cut it
    std::size_t pairs_estimated = 0;                  // distinct pairs this search requested
};

// Best-candidate search with threshold pruning. The oracle maps strategy
// indices (deviant, common) to a UtilityEstimate and must be deterministic
// for a given pair (cache-backed); the search never requests a pair (, k)
// again once k has been pruned.
//
// Walkthrough: estimate all diagonals first; then repeatedly pick an
// unexplored pair (i, k) with k still waiting, uniformly at random, and
// estimate it. If diag(k) < d * est(i, k) the strategy k is pruned from all
// further consideration; once k's row is complete it becomes a candidate.
// The loop guard leaves a last strategy in waiting: its row is completed
// (pruning still applies) and it is promoted if it survives, so a lone
// clearly-best survivor cannot be lost. The returned candidate maximizes the
// worst deviation ratio; ties break toward the smaller strategy index.
template <class Oracle>
SearchReport find_candidate(const StrategySpace& strategies, Oracle& estimate, double d,
                            RngStream& rng) {
    if (!(d >= 0.0 && d <= 1.0)) throw DomainError("threshold d must lie in [0, 1]");
    const std::size_t m = strategies.size();
    if (m == 0) throw DomainError("empty strategy space");

    SearchReport rep;
    std::vector<double> diag(m);
    for (std::size_t i = 0; i < m; ++i) {
        rep.diagonals.push_back(estimate(i, i));
        diag[i] = rep.diagonals.back().estimate();
    }
    rep.pairs_estimated = m;

    std::vector<bool> waiting(m, true);
    std::size_t n_waiting = m;
    std::vector<std::vector<std::size_t>> remaining(m); // unexplored deviations per column
    std::vector<std::vector<double>> row(m);            // estimates by deviation index
    for (std::size_t k = 0; k < m; ++k) {
        row[k].assign(m, -1.0);
        row[k][k] = diag[k];
        for (std::size_t i = 0; i < m; ++i)
            if (i != k) remaining[k].push_back(i);
    }

    std::set<std::size_t> candidates;
    std::size_t total_unexplored = m * (m - 1);

    auto explore = [&](std::size_t i, std::size_t k) {
        double u = estimate(i, k).estimate();
        row[k][i] = u;
        ++rep.pairs_estimated;
        return u;
    };
    auto prune = [&](std::size_t i, std::size_t k) {
        waiting[k] = false;
        --n_waiting;
        total_unexplored -= remaining[k].size();
        remaining[k].clear();
        rep.prune_witness[k] = i;
    };

    while (n_waiting > 1 && total_unexplored > 0) {
        std::size_t pick = rng.pick(total_unexplored);
        std::size_t k = 0;
        while (!waiting[k] || pick >= remaining[k].size()) {
            if (waiting[k]) pick -= remaining[k].size();
            ++k;
        }
        std::size_t slot = pick;
        std::size_t i = remaining[k][slot];
        remaining[k][slot] = remaining[k].back();
        remaining[k].pop_back();
        --total_unexplored;

        double u = explore(i, k);
        if (diag[k] < d * u) {
            prune(i, k);
        } else if (remaining[k].empty()) {
            waiting[k] = false;
            --n_waiting;
            candidates.insert(k);
        }
    }

    if (n_waiting == 1) {
        std::size_t k = 0;
        while (!waiting[k]) ++k;
        bool pruned = false;
        std::vector<std::size_t> rest(remaining[k].begin(), remaining[k].end());
        std::sort(rest.begin(), rest.end());
        for (std::size_t i : rest) {
            double u = explore(i, k);
            if (diag[k] < d * u) {
                prune(i, k);
                pruned = true;
                break;
            }
        }
        if (!pruned) candidates.insert(k);
    }

    if (candidates.empty()) return rep;

    CandidateResult best;
    bool first = true;
    for (std::size_t c : candidates) {
        double worst = kInf;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == c) continue;
            worst = std::min(worst, utility_ratio(diag[c], row[c][i]));
        }
        if (m == 1) worst = 1.0; // only the self pair exists
        best.candidate_ratios[c] = worst;
        if (first || worst > best.worst_ratio) {
            first = false;
            best.index = c;
            best.value = strategies.values[c];
            best.worst_ratio = worst;
        }
    }
    rep.result = best;
    return rep;
}

// Estimates every pair and maximizes the worst deviation ratio directly.
// Testing oracle for the pruning search: with d = 0 both must agree exactly
// when fed the same cached estimates.
template <class Oracle>
SearchReport exhaustive_candidate(const StrategySpace& strategies, Oracle& estimate) {
    const std::size_t m = strategies.size();
    if (m == 0) throw DomainError("empty strategy space");

    SearchReport rep;
    std::vector<double> diag(m);
    for (std::size_t i = 0; i < m; ++i) {
        rep.diagonals.push_back(estimate(i, i));
        diag[i] = rep.diagonals.back().estimate();
    }
    rep.pairs_estimated = m * m;

    CandidateResult best;
    bool first = true;
    for (std::size_t k = 0; k < m; ++k) {
        double worst = kInf;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == k) continue;
            worst = std::min(worst, utility_ratio(diag[k], estimate(i, k).estimate()));
        }
        if (m == 1) worst = 1.0;
        best.candidate_ratios[k] = worst;
        if (first || worst > best.worst_ratio) {
            first = false;
            best.index = k;
            best.value = strategies.values[k];
            best.worst_ratio = worst;
        }
    }
    rep.result = best;
    return rep;
}

} // namespace smcnash
