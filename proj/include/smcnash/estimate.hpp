#pragma once

#include "smcnash/model_io.hpp"
#include "smcnash/pool.hpp"
#include "smcnash/pwctl.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <tuple>

namespace smcnash {

class StaleCacheError : public Error { public: using Error::Error; };
class DomainError : public Error { public: using Error::Error; };

// Finite ordered list of strategy values for the swept parameter.
struct StrategySpace {
    std::string label;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    std::size_t index_of(double v) const {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] == v) return i;
        throw DomainError("strategy value outside the strategy space");
    }
};

// A symmetric protocol game: N parameterized node copies plus a medium
// (possibly encoded in shared variables), player 0's goal formula, and the
// strategy grid. `assemble` builds the concrete network for a (deviant,
// common) strategy pair; with coalitions, player 0's whole coalition gets
// the deviant value.
struct GameConfig {
    std::string model_name = "game";
    unsigned players = 2;
    unsigned coalition_size = 0; // 0 = no coalitions
    StrategySpace strategies;
    std::string goal_text;
    std::function<Network(const GameConfig&, double p_deviant, double p_common)> assemble;

    std::uint64_t fingerprint() const {
        if (strategies.values.empty()) throw DomainError("empty strategy space");
        Network probe = assemble(*this, strategies.values.front(), strategies.values.front());
        std::string canon = network_to_string(probe);
        std::uint64_t h = 0xCBF29CE484222325ull; // FNV-1a 64
        auto mix = [&h](const std::string& s) {
            for (unsigned char ch : s) {
                h ^= ch;
                h *= 0x100000001B3ull;
            }
        };
        mix(canon);
        mix(goal_text);
        mix(strategies.label);
        mix(std::to_string(players));
        mix(std::to_string(coalition_size));
        for (double v : strategies.values) mix(detail::fmt_double(v));
        return h;
    }
};

// Monte-Carlo estimate of U(p', p) = Pr[S(p', p, ..., p) |= goal].
struct UtilityEstimate {
    double p_deviant = 0.0;
    double p_common = 0.0;
    std::uint32_t k = 0;
    std::uint32_t n = 0;
    std::uint32_t truncations = 0; // counted as violated, reported separately

    double estimate() const { return n == 0 ? 0.0 : static_cast<double>(k) / n; }
};

// Stream-index domains keep the sample draws of different phases disjoint:
// reruns and phase-2 re-estimations never reuse phase-1 randomness.
namespace domain {
inline constexpr std::uint64_t kSearch = 1;
inline constexpr std::uint64_t kEvaluate = 2;
inline constexpr std::uint64_t kValidity = 3;
inline constexpr std::uint64_t kAdhoc = 4;
inline constexpr std::uint64_t kSearchDecisions = 5;
} // namespace domain

// Simulation i of pair (p', p) uses stream hash(p', p, domain) xor
// (base_seed + i): reproducible regardless of scheduling order, independent
// across pairs and phases.
inline std::uint64_t sim_stream(std::uint64_t domain, double p_deviant, double p_common,
                                std::uint64_t base_seed, std::uint32_t i) {
    std::uint64_t h = hash_combine(hash_combine(hash_double(p_deviant), hash_double(p_common)), domain);
    return h ^ (base_seed + i);
}

inline Network build_system(const GameConfig& cfg, double p_deviant, double p_common) {
    cfg.strategies.index_of(p_deviant);
    cfg.strategies.index_of(p_common);
    Network net = cfg.assemble(cfg, p_deviant, p_common);
    if (!net.built()) net.build();
    return net;
}

struct EstimateOptions {
    std::size_t max_steps = 1'000'000;
    WorkerPool* pool = nullptr;
};

inline UtilityEstimate estimate_utility(const GameConfig& cfg, double p_deviant, double p_common,
                                        std::uint32_t n, std::uint64_t base_seed,
                                        std::uint64_t domain = domain::kAdhoc,
                                        const EstimateOptions& opt = {}) {
    if (n < 1) throw DomainError("estimate_utility requires n >= 1");
    Network net = build_system(cfg, p_deviant, p_common);
    auto diags = validate(net);
    if (!diags.empty()) throw ConfigError("invalid network: " + diags.front());
    PwctlFormula goal = PwctlFormula::parse(cfg.goal_text);
    goal.resolve(net);

    auto run_chunk = [&](std::uint32_t lo, std::uint32_t hi) {
        Simulator sim(net);
        SimOptions so;
        so.max_steps = opt.max_steps;
        std::pair<std::uint32_t, std::uint32_t> acc{0, 0}; // satisfied, truncated
        for (std::uint32_t i = lo; i < hi; ++i) {
            RngStream rng(base_seed, sim_stream(domain, p_deviant, p_common, base_seed, i));
            PwctlMonitor monitor(net, goal);
            Run run = sim.simulate(monitor, rng, so);
            if (run.outcome == Run::Outcome::Satisfied)
                ++acc.first;
            else if (run.outcome == Run::Outcome::Truncated)
                ++acc.second;
        }
        return acc;
    };

    UtilityEstimate est;
    est.p_deviant = p_deviant;
    est.p_common = p_common;
    est.n = n;

    if (opt.pool && opt.pool->size() > 1 && n > 1) {
        std::uint32_t chunks = std::min<std::uint32_t>(n, opt.pool->size() * 4);
        std::uint32_t per = (n + chunks - 1) / chunks;
        std::vector<std::future<std::pair<std::uint32_t, std::uint32_t>>> futs;
        for (std::uint32_t lo = 0; lo < n; lo += per) {
            std::uint32_t hi = std::min(n, lo + per);
            futs.push_back(opt.pool->submit([&run_chunk, lo, hi] { return run_chunk(lo, hi); }));
        }
        for (auto& f : futs) {
            auto [k, t] = f.get();
            est.k += k;
            est.truncations += t;
        }
    } else {
        auto [k, t] = run_chunk(0, n);
        est.k = k;
        est.truncations = t;
    }
    return est;
}

// ---------------------------------------------------------------------------
// Estimation cache: one entry per (domain, p', p), keyed to a model
// fingerprint and base seed. Optionally persisted as an append-only text
// file, so a retry with a smaller pruning threshold reuses everything.
// ---------------------------------------------------------------------------

class EstimationCache {
public:
    using Key = std::tuple<std::uint64_t, double, double>;

    EstimationCache(std::uint64_t fingerprint, std::uint64_t base_seed)
        : fingerprint_(fingerprint), base_seed_(base_seed) {}

    // Attaches a persistence file. Loads existing entries; a fingerprint or
    // seed mismatch raises StaleCacheError (the caller must use a fresh
    // file or rebuild).
    void attach_file(const std::string& path) {
        std::lock_guard<std::mutex> lk(mu_);
        path_ = path;
        if (std::filesystem::exists(path)) {
            std::ifstream in(path);
            std::string line;
            if (!std::getline(in, line) || line.rfind("# smcnash-cache v1", 0) != 0)
                throw StaleCacheError("not a cache file: " + path);
            bool header_ok = false;
            while (std::getline(in, line)) {
                if (line.rfind("model ", 0) == 0) {
                    auto kv = detail::parse_kv_line(line);
                    if (std::stoull(kv.at("fingerprint"), nullptr, 16) != fingerprint_ ||
                        std::stoull(kv.at("base_seed")) != base_seed_)
                        throw StaleCacheError("cache file " + path +
                                              " was computed for a different model or seed");
                    header_ok = true;
                    continue;
                }
                if (line.empty() || line[0] == '#') continue;
                auto kv = detail::parse_kv_line(line);
                UtilityEstimate e;
                e.p_deviant = std::stod(kv.at("pd"));
                e.p_common = std::stod(kv.at("pc"));
                e.k = static_cast<std::uint32_t>(std::stoul(kv.at("k")));
                e.n = static_cast<std::uint32_t>(std::stoul(kv.at("n")));
                e.truncations = static_cast<std::uint32_t>(std::stoul(kv.at("trunc")));
                std::uint64_t dom = std::stoull(kv.at("domain"));
                insert_locked({dom, e.p_deviant, e.p_common}, e);
            }
            if (!header_ok) throw StaleCacheError("cache file " + path + " has no model header");
        } else {
            std::ofstream out(path);
            if (!out) throw Error("cannot create cache file: " + path);
            out << "# smcnash-cache v1\n";
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%016llx",
                          static_cast<unsigned long long>(fingerprint_));
            out << "model fingerprint=" << buf << " base_seed=" << base_seed_ << "\n";
        }
    }

    std::optional<UtilityEstimate> get(std::uint64_t dom, double pd, double pc,
                                       std::uint32_t n_min) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = entries_.find({dom, pd, pc});
        if (it == entries_.end() || it->second.n < n_min) return std::nullopt;
        return it->second;
    }

    void put(std::uint64_t dom, const UtilityEstimate& e) {
        std::lock_guard<std::mutex> lk(mu_);
        bool fresh = insert_locked({dom, e.p_deviant, e.p_common}, e);
        if (fresh && !path_.empty()) {
            std::ofstream out(path_, std::ios::app);
            out << "pair domain=" << dom << " pd=" << detail::fmt_double(e.p_deviant)
                << " pc=" << detail::fmt_double(e.p_common) << " k=" << e.k << " n=" << e.n
                << " trunc=" << e.truncations << "\n";
        }
    }

    std::uint64_t fingerprint() const { return fingerprint_; }
    std::uint64_t base_seed() const { return base_seed_; }

    std::vector<std::pair<Key, UtilityEstimate>> entries() const {
        std::lock_guard<std::mutex> lk(mu_);
        return {entries_.begin(), entries_.end()};
    }

    std::size_t size() const {
        std::lock_guard<std::mutex> lk(mu_);
        return entries_.size();
    }

private:
    bool insert_locked(const Key& key, const UtilityEstimate& e) {
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            if (it->second.n >= e.n) return false; // entries immutable; keep the larger n
            it->second = e;
            return true;
        }
        entries_.emplace(key, e);
        return true;
    }

    mutable std::mutex mu_;
    std::uint64_t fingerprint_;
    std::uint64_t base_seed_;
    std::string path_;
    std::map<Key, UtilityEstimate> entries_;
};

inline UtilityEstimate cache_get_or_estimate(EstimationCache& cache, const GameConfig& cfg,
                                             double pd, double pc, std::uint32_t n,
                                             std::uint64_t dom, const EstimateOptions& opt = {}) {
    if (cache.fingerprint() != cfg.fingerprint())
        throw StaleCacheError("cache fingerprint does not match this configuration");
    if (auto hit = cache.get(dom, pd, pc, n)) return *hit;
    UtilityEstimate e = estimate_utility(cfg, pd, pc, n, cache.base_seed(), dom, opt);
    cache.put(dom, e);
    return e;
}

} // namespace smcnash
