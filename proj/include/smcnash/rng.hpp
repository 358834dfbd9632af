#pragma once

#include <cstdint>
#include <cmath>
#include <limits>

namespace smcnash {

// Counter-based 64-bit generator: the SplitMix64 finalizer applied to a
// per-stream base plus a Weyl increment. Stateless in the counter, so the
// same (seed, stream) pair yields the same sequence on every platform and
// distinct streams are statistically independent for our purposes.
//
// References: Steele/Lea/Flood "Fast splittable pseudorandom number
// generators" (the mix function is the standard MurmurHash3/SplitMix64
// finalizer with Weyl constant 0x9E3779B97F4A7C15).
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) noexcept
        : base_(derive_base(seed, stream)) {}

    std::uint64_t next_u64() noexcept {
        counter_ += 0x9E3779B97F4A7C15ull;
        return mix64(base_ ^ counter_);
    }

    // Uniform on [0, 1): 53 random mantissa bits.
    double next_unit() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on [lo, hi]; degenerate intervals return lo exactly.
    double uniform(double lo, double hi) noexcept {
        if (!(hi > lo)) return lo;
        return lo + (hi - lo) * next_unit();
    }

    // Exponential with the given rate (mean 1/rate).
    double exponential(double rate) noexcept {
        double u = next_unit();
        return -std::log1p(-u) / rate;
    }

    // Uniform integer in [0, n); n must be positive.
    std::size_t pick(std::size_t n) noexcept {
        return static_cast<std::size_t>(next_u64() % n);
    }

    bool bernoulli(double p) noexcept { return next_unit() < p; }

    // UniformRandomBitGenerator interface, so <random> distributions can
    // consume a stream where convenient (test harnesses only).
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }
    result_type operator()() noexcept { return next_u64(); }

    static std::uint64_t mix64(std::uint64_t z) noexcept {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

private:
    static std::uint64_t derive_base(std::uint64_t seed, std::uint64_t stream) noexcept {
        // Two mixing rounds decorrelate adjacent (seed, stream) pairs.
        return mix64(mix64(seed + 0x9E3779B97F4A7C15ull) ^ mix64(stream + 0xD1B54A32D192ED03ull));
    }

    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

// Combines arbitrary 64-bit pieces into one stream index. Used by the seed
// policy: stream for simulation i of pair (p', p) in a given phase domain.
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return RngStream::mix64(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

inline std::uint64_t hash_double(double v) noexcept {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    __builtin_memcpy(&bits, &v, sizeof(bits));
    return RngStream::mix64(bits + 0x632BE59BD9B4E019ull);
}

} // namespace smcnash
