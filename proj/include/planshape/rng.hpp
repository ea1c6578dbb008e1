#pragma once

#include <cstdint>
#include <random>

namespace planshape {

// Seedable stream used for env stochasticity and epsilon-greedy draws.
// Uniform helpers avoid std::uniform_*_distribution so that identical seeds
// give identical trajectories on every platform/standard library.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // Rejection sampling; unbiased.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return draw % n;
    }

    int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    // Derives an independent child seed; used for per-episode resets.
    std::uint64_t fork_seed() { return engine_() ^ 0x9e3779b97f4a7c15ull; }

private:
    std::mt19937_64 engine_;
};

}  // namespace planshape
