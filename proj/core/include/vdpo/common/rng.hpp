#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace vdpo {

/// Seeded random source with platform-independent distributions.
///
/// Standard-library distributions are implementation defined, so golden files
/// and metrics would differ across toolchains. Only the raw mt19937_64 stream is
/// used; every distribution below is computed from it explicitly.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer on [0, n). Unbiased (rejection sampling).
    std::uint64_t uniform_int(std::uint64_t n);

    /// Standard normal via Box-Muller; caches the second variate.
    double normal();

    /// Exp(1) variate.
    double exponential();

    bool bernoulli(double p) { return uniform() < p; }

    /// Index drawn from an unnormalised non-negative weight vector.
    std::size_t categorical(std::span<const double> weights);

    /// Derive an independent child stream; deterministic in (state, tag).
    Rng split(std::uint64_t tag);

private:
    std::mt19937_64 engine_;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

/// SplitMix64 finaliser, used to derive seeds for child streams.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/// `k` distinct indices from [0, n) (Floyd's algorithm), in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace vdpo
