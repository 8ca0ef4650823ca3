#pragma once

// Deterministic RNG streams. Distribution code is hand-rolled (mt19937_64
// plus explicit transforms) so results are reproducible bit-for-bit for a
// given seed regardless of standard-library internals. Derived streams use
// splitmix64 so (seed, index) pairs never collide in practice.

#include <cstdint>
#include <random>

#include "guarding/types.hpp"

namespace guarding {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Marsaglia polar.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    Vec gaussian_vec(int n) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = gaussian();
        return x;
    }

    Vec unit_vec(int n) {
        Vec x;
        do {
            x = gaussian_vec(n);
        } while (x.norm() < 1e-12);
        return x / x.norm();
    }

    // Uniform in the ball of given center and radius.
    Vec in_ball(const Vec& center, double radius) {
        const int n = static_cast<int>(center.size());
        const double r = radius * std::pow(uniform(), 1.0 / n);
        return center + r * unit_vec(n);
    }

    Vec on_sphere(const Vec& center, double radius) {
        return center + radius * unit_vec(static_cast<int>(center.size()));
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace guarding
