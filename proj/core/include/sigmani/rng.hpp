#pragma once

#include <cstdint>
#include <cmath>

namespace sigmani {

/// splitmix64: the documented, stable 64-bit mixer used to derive per-path
/// streams from (master seed, path index). Identical streams regardless of
/// worker count.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ seeded via splitmix64 of (master_seed, stream_id).
class Rng {
public:
    Rng(std::uint64_t master_seed, std::uint64_t stream_id) {
        std::uint64_t st = master_seed ^ (0x5851f42d4c957f2dULL * (stream_id + 1));
        for (auto& w : s_) w = splitmix64(st);
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

    /// Uniform in (0,1).
    double next_uniform() {
        return (next_u64() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Standard normal (Box-Muller with caching).
    double next_normal() {
        if (have_) {
            have_ = false;
            return cached_;
        }
        double u1 = next_uniform(), u2 = next_uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool have_ = false;
};

} // namespace sigmani
