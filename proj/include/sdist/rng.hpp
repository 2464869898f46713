#pragma once

#include <cstdint>
#include <random>

namespace sdist {

/// Seeded random source. Only the raw mt19937_64 stream is used; the
/// uniform/normal transforms are done here so that sampled values do not
/// depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Independent substream keyed by (seed, stream).
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n).
    std::uint64_t index(std::uint64_t n);

    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sdist
