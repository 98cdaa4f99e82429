#pragma once

#include <cmath>
#include <cstdint>

namespace hiercloud {

// splitmix64 stream. std::mt19937 + std::uniform_*_distribution are not
// byte-stable across standard libraries, and seeded sampling results must
// be, so the generator and the bounded/real draws are spelled out here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Independent stream for (seed, index) pairs; used to shard generation
    // over points so the output does not depend on thread count.
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        Rng r(seed + 0x9E3779B97F4A7C15ULL * (stream + 1));
        r.next_u64();
        return r;
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw in [0, bound); bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) {
        // Lemire multiply-shift with rejection.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (lo < threshold) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Standard normal via Box-Muller (one value per call; no cached spare,
    // so the draw count per point stays fixed).
    double next_gaussian() {
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

}  // namespace hiercloud
