// Timing comparison of the OpenMP kernels against their serial references:
// steering-matrix assembly over samples and pattern sweep over angles.

#include <chrono>
#include <cstdio>
#include <numbers>

#include <omp.h>

#include "trisynth/metrics.hpp"
#include "trisynth/pattern_grid.hpp"

using namespace trisynth;
using clock_type = std::chrono::steady_clock;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

DesignSpec make_spec(int m) {
    return DesignSpec{Direction(0.0, 90.0 * kDeg),
                      Polarization(55.0 * kDeg, 100.0 * kDeg),
                      {{+1, 10.0, 90.0}, {-1, 10.0, 90.0}},
                      0.0,
                      1.0,
                      0.5,
                      CandidateGrid(m, 10.0 / (m - 1))};
}
}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    std::printf("%-34s %10s %10s %8s\n", "kernel", "serial(s)", "omp(s)", "speedup");

    for (int m : {301, 1001}) {
        const DesignSpec spec = make_spec(m);
        const SampledPattern pattern = build_samples(spec);
        Eigen::VectorXcd p1, p2;
        Eigen::MatrixXcd s1, s2;

        auto t0 = clock_type::now();
        assemble_matrices_serial(pattern, spec.grid, p1, s1);
        const double serial = seconds_since(t0);
        t0 = clock_type::now();
        assemble_matrices(pattern, spec.grid, p2, s2);
        const double parallel = seconds_since(t0);
        if (s1 != s2 || p1 != p2) {
            std::printf("assembly mismatch at M=%d\n", m);
            return 1;
        }
        char label[64];
        std::snprintf(label, sizeof(label), "assemble_matrices M=%d L=%d", m, pattern.count());
        std::printf("%-34s %10.4f %10.4f %7.2fx\n", label, serial, parallel, serial / parallel);
    }

    {
        const DesignSpec spec = make_spec(301);
        WeightVector w(spec.grid.num_locations());
        for (int i = 0; i < w.size(); ++i) {
            w.triples[i] = Eigen::Vector3cd(std::complex<double>(0.01 * i, -0.02),
                                            std::complex<double>(0.5, 0.1 * i),
                                            std::complex<double>(-0.3, 0.02 * i));
        }
        const double res = 0.02;
        auto t0 = clock_type::now();
        const PatternSweep a =
            sweep_pattern_serial(w, spec.grid.positions(), spec.polarization, res);
        const double serial = seconds_since(t0);
        t0 = clock_type::now();
        const PatternSweep b = sweep_pattern(w, spec.grid.positions(), spec.polarization, res);
        const double parallel = seconds_since(t0);
        for (size_t i = 0; i < a.points.size(); ++i) {
            if (a.points[i].magnitude_db != b.points[i].magnitude_db) {
                std::printf("sweep mismatch at point %zu\n", i);
                return 1;
            }
        }
        char label[64];
        std::snprintf(label, sizeof(label), "sweep_pattern M=301 res=%.3g", res);
        std::printf("%-34s %10.4f %10.4f %7.2fx\n", label, serial, parallel, serial / parallel);
    }
    return 0;
}
