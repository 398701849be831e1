#pragma once

#include <cmath>
#include <cstdint>

namespace affinity {

// Deterministic, platform-independent generator (xoshiro256** seeded via
// splitmix64). std::mt19937 plus the standard distributions would be
// implementation-defined, which breaks the byte-identical-output contract.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) word = splitmix64(x);
    }

    std::uint64_t nextU64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53 bits of precision.
    double nextDouble() { return static_cast<double>(nextU64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, upperExclusive) without modulo bias.
    std::size_t nextIndex(std::size_t upperExclusive) {
        if (upperExclusive == 0) return 0;
        const auto wide = static_cast<unsigned __int128>(nextU64()) *
                          static_cast<unsigned __int128>(upperExclusive);
        return static_cast<std::size_t>(wide >> 64);
    }

    // Standard normal via Marsaglia polar; deterministic for a fixed seed.
    double nextGaussian() {
        if (haveSpare_) {
            haveSpare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * nextDouble() - 1.0;
            v = 2.0 * nextDouble() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double scale = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * scale;
        haveSpare_ = true;
        return u * scale;
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool haveSpare_ = false;
};

// Stable seed derivation for independent substreams (per-k restarts etc.).
inline std::uint64_t mixSeed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL + (salt << 1));
    return Rng::splitmix64(x);
}

}  // namespace affinity
