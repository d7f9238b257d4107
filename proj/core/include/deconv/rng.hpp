#pragma once

#include <cstdint>

namespace deconv {

// Counter-based splittable generator. The exact algorithm is pinned so runs
// reproduce across machines and versions:
//
//   GAMMA = 0x9E3779B97F4A7C15
//   mix64(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//             z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31
//   derive_key(seed, stream) = mix64(mix64(seed) + GAMMA * (stream + 1))
//   draw i (0-based)         = mix64(key + GAMMA * (i + 1))
//   uniform in (0,1)         = ((draw >> 11) + 0.5) * 2^-53
//
// Streams derived from distinct (seed, stream) pairs are independent without
// coordination, so replication m of a Monte Carlo run owns stream m and can
// be recomputed in isolation.
namespace rng {

inline constexpr std::uint64_t GAMMA = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) + GAMMA * (stream + 1));
}

}  // namespace rng

struct CounterRng {
    std::uint64_t key = 0;
    std::uint64_t counter = 0;

    CounterRng() = default;
    explicit CounterRng(std::uint64_t k) : key(k) {}
    static CounterRng for_stream(std::uint64_t seed, std::uint64_t stream) {
        return CounterRng(rng::derive_key(seed, stream));
    }

    std::uint64_t next_u64() { return rng::mix64(key + rng::GAMMA * (++counter)); }

    // strictly inside (0,1)
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal();       // standard normal by quantile inversion
    double next_exponential();  // rate 1
};

}  // namespace deconv
