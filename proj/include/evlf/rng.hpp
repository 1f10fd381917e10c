#pragma once

#include <cstdint>

namespace evlf {

/// splitmix64 step; used for seeding and for hashing substream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic substream derivation. Streams for (seed, a), (seed, a, b),
/// (seed, a, b, c) are pairwise decorrelated; this is the documented split
/// function used for per-view / per-frame randomness.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64(s);
    s ^= a + 0x632be59bd9b4e019ULL;
    h ^= splitmix64(s);
    s ^= b + 0x9e6c63d0876a9a47ULL;
    h ^= splitmix64(s);
    s ^= c + 0xd1b54a32d192ed03ULL;
    h ^= splitmix64(s);
    return h;
}

// Substream purpose tags (arbitrary distinct constants).
inline constexpr std::uint64_t kStreamTurbulence = 0x7455524246u;  // latent field noise
inline constexpr std::uint64_t kStreamContrast = 0x434f4e5452u;    // per-view threshold draw
inline constexpr std::uint64_t kStreamScene = 0x5343454e45u;       // synthetic scene content
inline constexpr std::uint64_t kStreamStrength = 0x53545247u;      // per-clip strength label

/// xoshiro256++ with an explicit Box-Muller normal. Self-contained so that
/// draws are bit-reproducible across standard libraries and thread counts.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal draw (Box-Muller, pairs cached).
    double normal();

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace evlf
