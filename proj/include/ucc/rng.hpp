#pragma once

#include <cmath>
#include <cstdint>

namespace ucc {

// splitmix64 finalizer; used to mix seeds and derive independent streams.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** with explicit seeding. Uniform/normal draws are implemented
// here rather than via <random> distributions so that sample paths are
// identical across standard libraries.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& w : s_) w = z = mix64(z);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform strictly inside (0,1)
    double uniform_pos() {
        double u;
        do { u = uniform(); } while (u <= 0.0);
        return u;
    }

    double normal() {
        const double u = uniform_pos();
        const double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586477 * v);
    }

    // uniform integer in [0, n)
    std::uint64_t uniform_below(std::uint64_t n) {
        // rejection to avoid modulo bias
        const std::uint64_t lim = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do { x = next_u64(); } while (x >= lim);
        return x % n;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

// Deterministic per-task stream: hash-combines the master seed with salts.
inline RngStream derive_stream(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(master ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return RngStream(h);
}

}  // namespace ucc
