#pragma once

#include "smcnash/estimate.hpp"

#include <cmath>
#include <random>

namespace smcnash {

class InsufficientSimulations : public Error { public: using Error::Error; };

// Input to the hypothesis test: the candidate's fresh diagonal estimate plus
// the fresh estimates for each deviation, all computed with the same n.
struct EvaluationInput {
    double candidate = 0.0;
    double diag = 0.0; // fresh U(p, p)
    std::vector<std::pair<double, double>> deviations; // (p', fresh U(p', p))
    std::uint32_t n = 0;
    double alpha = 0.05;
};

// Error-bound sum
//   f(delta) = sum_i 1/2 (1 - erf(sqrt(n) (U(p,p) - delta U(p_i,p))))
// over the provided estimate set. f is continuous and nondecreasing in
// delta (strictly increasing while some deviation estimate is positive),
// f(0) > 0, and f <= |terms| everywhere. The hypothesis "candidate is a
// delta-relaxed equilibrium" is accepted at level alpha whenever
// f(delta) <= alpha.
inline double f_delta(const EvaluationInput& in, double delta) {
    double sqn = std::sqrt(static_cast<double>(in.n));
    double sum = 0.0;
    for (const auto& [p, u] : in.deviations)
        sum += 0.5 * (1.0 - std::erf(sqn * (in.diag - delta * u)));
    return sum;
}

struct EvaluationResult {
    double delta = 0.0;      // certified value: left bracket endpoint, f(delta) <= alpha
    double delta_hi = 0.0;   // right endpoint of the final bisection bracket
    double f_at_delta = 0.0;
    double bracket = 0.0;    // upper end of the initial bracket [0, b]
    bool capped = false;     // f stayed <= alpha all the way to delta_max
    std::vector<double> terms; // per-deviation terms at the certified delta
};

// Largest delta accepted at level alpha: exponential search for the smallest
// integer b with f(b) > alpha, then bisection on [b/2, b] until the residual
// |f(delta) - alpha| falls under tol. When even delta_max keeps f under
// alpha (every deviation estimate is 0), the result is capped at
//   delta_max = diag / max(max_i dev_i, 1/n) + 1
// since f alone no longer bounds delta.
inline EvaluationResult certify_delta(const EvaluationInput& in, double tol = 1e-9) {
    if (in.n < 1) throw DomainError("certify_delta requires n >= 1");
    if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (!std::isfinite(in.diag)) throw DomainError("non-finite diagonal estimate");
    double max_dev = 0.0;
    for (const auto& [p, u] : in.deviations) {
        if (!std::isfinite(u) || u < 0.0) throw DomainError("non-finite deviation estimate");
        max_dev = std::max(max_dev, u);
    }
    if (in.deviations.empty()) throw DomainError("certify_delta needs at least one estimate");

    double f0 = f_delta(in, 0.0);
    if (f0 > in.alpha)
        throw InsufficientSimulations(
            "f(0) = " + std::to_string(f0) + " already exceeds alpha = " + std::to_string(in.alpha) +
            "; raise the simulation count n to certify any delta");

    double delta_max = in.diag / std::max(max_dev, 1.0 / static_cast<double>(in.n)) + 1.0;

    EvaluationResult res;
    if (f_delta(in, delta_max) <= in.alpha) {
        res.delta = delta_max;
        res.delta_hi = delta_max;
        res.f_at_delta = f_delta(in, delta_max);
        res.bracket = delta_max;
        res.capped = true;
    } else {
        double lo = 0.0, hi = 1.0;
        while (hi < delta_max && f_delta(in, hi) <= in.alpha) {
            lo = hi;
            hi = std::min(hi * 2.0, delta_max);
        }
        res.bracket = hi;
        for (int it = 0; it < 200; ++it) {
            if (std::abs(f_delta(in, lo) - in.alpha) <= tol) break;
            if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
            double mid = lo + (hi - lo) / 2.0;
            if (f_delta(in, mid) <= in.alpha)
                lo = mid;
            else
                hi = mid;
        }
        res.delta = lo;
        res.delta_hi = hi;
        res.f_at_delta = f_delta(in, lo);
    }

    double sqn = std::sqrt(static_cast<double>(in.n));
    for (const auto& [p, u] : in.deviations)
        res.terms.push_back(0.5 * (1.0 - std::erf(sqn * (in.diag - res.delta * u))));
    return res;
}

// ---------------------------------------------------------------------------
// Validity harness: the synthetic model of the reference experiment. The
// candidate's true utility column is 0.5 against every other strategy and
// 0.5 * true_delta on the diagonal, so true_delta is exactly the largest
// delta for which the candidate is a delta-relaxed equilibrium. Each trial
// draws binomial estimates and certifies; the exceedance rate
// P[delta_hat > true_delta] must stay within the significance level.
//
// The deviation set holds the strategies other than the candidate itself: a
// self term would bound every certified delta by 1 regardless of the true
// value. With a single-strategy space the self pair is the only estimate
// there is and it is used as-is.
// ---------------------------------------------------------------------------

struct ValidityStats {
    double true_delta = 0.0;
    std::uint32_t n = 0;
    std::uint32_t trials = 0;
    std::vector<double> deltas; // one certified delta per trial
    double mean = 0.0;
    double exceedance = 0.0; // fraction of trials with delta_hat > true_delta
};

inline double validity_trial(double true_delta, std::size_t n_strategies, std::uint32_t n,
                             double alpha, RngStream& rng) {
    std::binomial_distribution<std::uint32_t> diag_draw(n, 0.5 * true_delta);
    std::binomial_distribution<std::uint32_t> dev_draw(n, 0.5);
    EvaluationInput in;
    in.n = n;
    in.alpha = alpha;
    in.diag = static_cast<double>(diag_draw(rng)) / n;
    if (n_strategies <= 1) {
        in.deviations.emplace_back(0.0, in.diag);
    } else {
        for (std::size_t i = 1; i < n_strategies; ++i)
            in.deviations.emplace_back(static_cast<double>(i),
                                       static_cast<double>(dev_draw(rng)) / n);
    }
    try {
        return certify_delta(in).delta;
    } catch (const InsufficientSimulations&) {
        return 0.0; // nothing certifiable at this n
    }
}

inline ValidityStats validity_experiment(double true_delta, std::size_t n_strategies,
                                         std::uint32_t n, std::uint32_t trials,
                                         std::uint64_t seed, double alpha = 0.05,
                                         WorkerPool* pool = nullptr) {
    if (!(true_delta > 0.0) || n_strategies == 0 || n == 0 || trials == 0)
        throw DomainError("validity_experiment parameters must be positive");
    if (0.5 * true_delta > 1.0) throw DomainError("true_delta must keep 0.5*delta within [0, 1]");

    ValidityStats stats;
    stats.true_delta = true_delta;
    stats.n = n;
    stats.trials = trials;
    stats.deltas.resize(trials);

    auto run_trial = [&](std::uint32_t t) {
        RngStream rng(seed, hash_combine(domain::kValidity, t));
        return validity_trial(true_delta, n_strategies, n, alpha, rng);
    };

    if (pool && pool->size() > 1) {
        std::vector<std::future<double>> futs;
        futs.reserve(trials);
        for (std::uint32_t t = 0; t < trials; ++t)
            futs.push_back(pool->submit([&run_trial, t] { return run_trial(t); }));
        for (std::uint32_t t = 0; t < trials; ++t) stats.deltas[t] = futs[t].get();
    } else {
        for (std::uint32_t t = 0; t < trials; ++t) stats.deltas[t] = run_trial(t);
    }

    double sum = 0.0;
    std::uint32_t over = 0;
    for (double d : stats.deltas) {
        sum += d;
        if (d > true_delta) ++over;
    }
    stats.mean = sum / trials;
    stats.exceedance = static_cast<double>(over) / trials;
    return stats;
}

} // namespace smcnash
