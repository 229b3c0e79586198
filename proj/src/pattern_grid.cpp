#include "trisynth/pattern_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trisynth {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
// Degree values seen here come through a degree -> radian -> degree round
// trip, so comparisons carry a few-ulp tolerance.
constexpr double kAngleEps = 1e-9;

Direction direction_from_signed_deg(double signed_theta_deg) {
    const double theta = std::min(std::abs(signed_theta_deg), 90.0) * kDeg;
    const double phi = (signed_theta_deg >= 0.0 ? 90.0 : -90.0) * kDeg;
    return Direction(std::min(theta, std::numbers::pi / 2.0), phi);
}
}  // namespace

double mainlobe_signed_deg(const DesignSpec& spec) {
    const double theta_deg = spec.mainlobe.theta / kDeg;
    return spec.mainlobe.phi >= 0.0 ? theta_deg : -theta_deg;
}

std::vector<std::pair<double, double>> carved_sidelobe_intervals(const DesignSpec& spec) {
    const double ml = mainlobe_signed_deg(spec);
    const double tw = spec.transition_halfwidth_deg;
    std::vector<std::pair<double, double>> out;
    for (const SidelobeRegion& region : spec.sidelobe_regions) {
        if (region.phi_sign != 1 && region.phi_sign != -1) {
            throw std::invalid_argument("SidelobeRegion: phi_sign must be +1 or -1");
        }
        if (!(region.theta_lo_deg >= 0.0 && region.theta_hi_deg <= 90.0 &&
              region.theta_lo_deg <= region.theta_hi_deg)) {
            throw std::invalid_argument("SidelobeRegion: need 0 <= lo <= hi <= 90");
        }
        double lo = region.theta_lo_deg;
        double hi = region.theta_hi_deg;
        if (region.phi_sign < 0) {
            std::swap(lo, hi);
            lo = -lo;
            hi = -hi;
        }
        // Carve the open transition window (ml - tw, ml + tw) out of [lo, hi].
        const double wlo = ml - tw;
        const double whi = ml + tw;
        if (tw > 0.0 && wlo < hi - kAngleEps && whi > lo + kAngleEps) {
            if (lo < wlo - kAngleEps) out.emplace_back(lo, std::min(hi, wlo));
            if (whi < hi - kAngleEps) out.emplace_back(std::max(lo, whi), hi);
        } else {
            out.emplace_back(lo, hi);
        }
    }
    return out;
}

SampledPattern build_samples(const DesignSpec& spec) {
    if (spec.sidelobe_regions.empty()) {
        throw std::invalid_argument("build_samples: sidelobe region set is empty");
    }
    if (!(spec.sidelobe_step_deg > 0.0)) {
        throw std::invalid_argument("build_samples: sidelobe_step_deg must be positive");
    }
    if (!(spec.alpha >= 0.0)) {
        throw std::invalid_argument("build_samples: alpha must be nonnegative");
    }

    const double ml = mainlobe_signed_deg(spec);
    const double tw = spec.transition_halfwidth_deg;

    SampledPattern pattern;
    pattern.samples.push_back(
        {spec.mainlobe, spec.polarization, ml});

    std::vector<double> signed_angles;
    for (const SidelobeRegion& region : spec.sidelobe_regions) {
        const double span = region.theta_hi_deg - region.theta_lo_deg;
        const int steps = static_cast<int>(std::floor(span / spec.sidelobe_step_deg + 1e-9));
        for (int i = 0; i <= steps; ++i) {
            const double theta_deg = region.theta_lo_deg + i * spec.sidelobe_step_deg;
            const double signed_deg = region.phi_sign * theta_deg;
            if (std::abs(signed_deg - ml) <= kAngleEps) continue;  // mainlobe is its own sample
            if (tw > 0.0 && std::abs(signed_deg - ml) < tw - kAngleEps) continue;  // transition
            signed_angles.push_back(signed_deg);
        }
    }
    // Drop exact duplicates from overlapping regions, keeping first occurrence.
    std::vector<double> unique_angles;
    for (double a : signed_angles) {
        if (std::find(unique_angles.begin(), unique_angles.end(), a) == unique_angles.end()) {
            unique_angles.push_back(a);
        }
    }
    if (unique_angles.empty()) {
        throw std::invalid_argument("build_samples: sidelobe regions contain no samples");
    }
    for (double signed_deg : unique_angles) {
        pattern.samples.push_back(
            {direction_from_signed_deg(signed_deg), spec.polarization, signed_deg});
    }

    pattern.reference = Eigen::VectorXcd::Zero(pattern.count());
    pattern.reference[0] = 1.0;
    return pattern;
}

namespace {
void assemble_rows(const SampledPattern& pattern, const CandidateGrid& grid,
                   Eigen::VectorXcd& p_r, Eigen::MatrixXcd& S, bool parallel) {
    const int L = pattern.count();
    const int M = grid.num_locations();
    p_r = pattern.reference;
    S.resize(L, 3 * M);
#pragma omp parallel for schedule(static) if (parallel)
    for (int l = 0; l < L; ++l) {
        S.row(l) = full_steering(pattern.samples[l].dir, pattern.samples[l].pol, grid)
                       .transpose();
    }
}
}  // namespace

void assemble_matrices_serial(const SampledPattern& pattern, const CandidateGrid& grid,
                              Eigen::VectorXcd& p_r, Eigen::MatrixXcd& S) {
    assemble_rows(pattern, grid, p_r, S, false);
}

void assemble_matrices(const SampledPattern& pattern, const CandidateGrid& grid,
                       Eigen::VectorXcd& p_r, Eigen::MatrixXcd& S) {
    assemble_rows(pattern, grid, p_r, S, true);
}

LiftedSystem lift_to_real(const Eigen::VectorXcd& p_r, const Eigen::MatrixXcd& S) {
    const int L = static_cast<int>(p_r.size());
    if (S.rows() != L || S.cols() % 3 != 0) {
        throw std::invalid_argument("lift_to_real: inconsistent dimensions");
    }
    const int M = static_cast<int>(S.cols() / 3);

    LiftedSystem sys;
    sys.p_hat.resize(2 * L);
    sys.p_hat.head(L) = p_r.real();
    sys.p_hat.tail(L) = p_r.imag();

    sys.S_hat = Eigen::MatrixXd::Zero(2 * L, kLiftedBlock * M);
    sys.c_hat = Eigen::VectorXd::Zero(kLiftedBlock * M);
    for (int m = 0; m < M; ++m) {
        sys.c_hat[kLiftedBlock * m] = 1.0;
        for (int axis = 0; axis < 3; ++axis) {
            const auto col = S.col(3 * m + axis);
            // Column for Re(w): (Re s; Im s). Column for -Im(w): (-Im s; Re s).
            sys.S_hat.col(kLiftedBlock * m + 1 + axis).head(L) = col.real();
            sys.S_hat.col(kLiftedBlock * m + 1 + axis).tail(L) = col.imag();
            sys.S_hat.col(kLiftedBlock * m + 4 + axis).head(L) = -col.imag();
            sys.S_hat.col(kLiftedBlock * m + 4 + axis).tail(L) = col.real();
        }
    }
    return sys;
}

WeightVector weights_from_lifted(const Eigen::VectorXd& w_hat) {
    if (w_hat.size() % kLiftedBlock != 0) {
        throw std::invalid_argument("weights_from_lifted: length must be a multiple of 7");
    }
    const int M = static_cast<int>(w_hat.size() / kLiftedBlock);
    WeightVector w(M);
    for (int m = 0; m < M; ++m) {
        for (int axis = 0; axis < 3; ++axis) {
            w.triples[m][axis] = std::complex<double>(w_hat[kLiftedBlock * m + 1 + axis],
                                                      -w_hat[kLiftedBlock * m + 4 + axis]);
        }
    }
    return w;
}

}  // namespace trisynth
