#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

// std:: distributions are not bit-portable across standard libraries, so the
// tests draw uniforms and normals directly from the engine bits.
struct TestRng {
    std::mt19937_64 eng;

    explicit TestRng(uint64_t seed) : eng(seed) {}

    double uniform() { return static_cast<double>(eng() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(eng() % static_cast<uint64_t>(hi - lo + 1));
    }

    double normal() {
        double u1 = uniform();
        const double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
};
