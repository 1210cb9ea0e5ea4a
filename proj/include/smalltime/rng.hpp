#pragma once

#include <cstdint>
#include <limits>

// Substream random number generation.
//
// Monte Carlo work is split into chunks of consecutive paths, and every chunk
// draws from its own generator obtained as substream(seed, chunk_index).
// The substream contract, which the rest of the library relies on:
//   * fully determined by (seed, chunk_index),
//   * distinct chunk indices under one seed give distinct, statistically
//     independent streams,
//   * independent of thread count and of the order in which chunks run.
// The concrete generator (xoshiro256++ seeded through splitmix64) is an
// implementation detail; only the contract above is stable.

namespace smalltime::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Xoshiro256pp {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256pp(std::uint64_t seed = 0) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
};

// splitmix64 is injective in the chunk index for a fixed seed (odd multiplier),
// so distinct chunks can never derive identical engine states.
inline Xoshiro256pp substream(std::uint64_t seed, std::uint64_t chunk_index) {
    std::uint64_t sm = seed;
    std::uint64_t mixed = splitmix64(sm) ^ (0x9E3779B97F4A7C15ull * (chunk_index + 1));
    return Xoshiro256pp(mixed);
}

// Uniform on the open interval (0,1); never returns an endpoint, so inverse
// CDF sampling cannot produce infinities.
inline double uniform01(Xoshiro256pp& gen) {
    return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53;
}

// Derives an independent seed for sub-experiment `index` of a schedule. The
// mixing constant differs from substream()'s, so schedule-level seeds and
// chunk-level streams never share a derivation chain.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ull * (index + 1));
    return splitmix64(s);
}

} // namespace smalltime::rng
