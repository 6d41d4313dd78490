#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace ldcone {

// Self-contained splitmix64 stream so results are reproducible bit-for-bit
// across platforms and independent of how work is split over threads.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // log-uniform over [lo, hi], lo > 0
    double loguniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }

    // standard normal via Box-Muller; one value per call keeps streams simple
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    std::vector<double> normals(std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = normal();
        return v;
    }
};

// Deterministic per-item seed derivation; the derived streams do not overlap
// in practice and do not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    Rng r(seed ^ (0xD1B54A32D192ED03ull + index * 0x9E3779B97F4A7C15ull));
    return r.next_u64();
}

} // namespace ldcone
