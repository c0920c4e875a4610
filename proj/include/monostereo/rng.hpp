#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace monostereo {

/// splitmix64 finalizer; used to derive independent seeds and as the hash
/// behind procedural noise. Fully specified, so results are identical across
/// platforms and standard libraries.
inline uint64_t mix64(uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t a, uint64_t b) { return mix64(a ^ mix64(b)); }

/// FNV-1a over bytes; stable content hash for provenance records.
inline uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Deterministic random stream. std::mt19937_64 is fully specified by the
/// standard; the distribution helpers below are hand-rolled because the
/// std::*_distribution adapters are implementation-defined and would make
/// outputs differ between standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform integer in [0, n), n > 0.
    uint64_t uniform_u64(uint64_t n) { return eng_() % n; }

    uint32_t uniform_u32(uint32_t n) { return static_cast<uint32_t>(eng_() % n); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; deterministic given the stream state.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double sigma) { return mean + sigma * normal(); }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Smooth deterministic value noise in [0,1]; bilinear interpolation of
/// hashed lattice values. Used for procedural albedo textures.
inline double value_noise2(double u, double v, uint64_t seed) {
    const double fu = std::floor(u), fv = std::floor(v);
    const int64_t iu = static_cast<int64_t>(fu), iv = static_cast<int64_t>(fv);
    const double tu = u - fu, tv = v - fv;
    auto lattice = [&](int64_t a, int64_t b) {
        const uint64_t h = mix64(seed, mix64(static_cast<uint64_t>(a) * 0x9e3779b97f4a7c15ULL ^
                                             static_cast<uint64_t>(b)));
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    };
    auto smooth = [](double t) { return t * t * (3.0 - 2.0 * t); };
    const double su = smooth(tu), sv = smooth(tv);
    const double a = lattice(iu, iv), b = lattice(iu + 1, iv);
    const double c = lattice(iu, iv + 1), d = lattice(iu + 1, iv + 1);
    const double top = a + (b - a) * su;
    const double bot = c + (d - c) * su;
    return top + (bot - top) * sv;
}

} // namespace monostereo
