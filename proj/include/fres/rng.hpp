#pragma once

#include <cstdint>

namespace fres {

/// splitmix64: expands a 64-bit seed into well-mixed words (Steele et al.).
/// Used only for seeding; one instance per seed expansion.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ (Blackman & Vigna). One independent instance per trajectory,
/// seeded through splitmix64 so that nearby stream ids decorrelate.
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next_u64() {
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

    /// Uniform double in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

/// Seed for trajectory `index` within an ensemble keyed by `master`.
/// XOR-ing the counter keeps the scheme splittable and reproducible; the
/// generator's splitmix64 expansion decorrelates neighbouring indices.
inline std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
    return master ^ index;
}

} // namespace fres
