#include "trisynth/array_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trisynth {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr std::complex<double> kJ{0.0, 1.0};
}  // namespace

Direction::Direction(double theta_rad, double phi_rad)
    : theta(theta_rad), phi(phi_rad) {
    if (!(theta >= 0.0 && theta <= kPi / 2.0)) {
        throw std::invalid_argument("Direction: theta must lie in [0, pi/2]");
    }
    if (!(phi >= -kPi / 2.0 && phi <= kPi / 2.0)) {
        throw std::invalid_argument("Direction: phi must lie in [-pi/2, pi/2]");
    }
}

Polarization::Polarization(double gamma_rad, double eta_rad)
    : gamma(gamma_rad), eta(eta_rad) {
    if (!(gamma >= 0.0 && gamma <= kPi / 2.0)) {
        throw std::invalid_argument("Polarization: gamma must lie in [0, pi/2]");
    }
    if (!(eta >= -kPi && eta < kPi)) {
        throw std::invalid_argument("Polarization: eta must lie in [-pi, pi)");
    }
}

CandidateGrid::CandidateGrid(int num_locations, double spacing_wl)
    : spacing_(spacing_wl) {
    if (num_locations <= 0) {
        throw std::invalid_argument("CandidateGrid: num_locations must be positive");
    }
    if (!(spacing_wl > 0.0)) {
        throw std::invalid_argument("CandidateGrid: spacing must be positive");
    }
    positions_.resize(num_locations);
    for (int m = 0; m < num_locations; ++m) {
        positions_[m] = m * spacing_wl;
    }
}

Eigen::VectorXcd WeightVector::flatten() const {
    Eigen::VectorXcd flat(3 * size());
    for (int m = 0; m < size(); ++m) {
        flat.segment<3>(3 * m) = triples[m];
    }
    return flat;
}

WeightVector WeightVector::from_flat(const Eigen::VectorXcd& flat) {
    if (flat.size() % 3 != 0) {
        throw std::invalid_argument("WeightVector: flat length must be a multiple of 3");
    }
    WeightVector w(static_cast<int>(flat.size() / 3));
    for (int m = 0; m < w.size(); ++m) {
        w.triples[m] = flat.segment<3>(3 * m);
    }
    return w;
}

Eigen::VectorXcd spatial_steering(const Direction& dir,
                                  std::span<const double> positions_wl) {
    const double k = -2.0 * kPi * std::sin(dir.theta) * std::sin(dir.phi);
    Eigen::VectorXcd s(positions_wl.size());
    for (size_t m = 0; m < positions_wl.size(); ++m) {
        s[static_cast<Eigen::Index>(m)] = std::exp(kJ * (k * positions_wl[m]));
    }
    return s;
}

Eigen::VectorXcd spatial_steering(const Direction& dir, const CandidateGrid& grid) {
    return spatial_steering(dir, std::span<const double>(grid.positions()));
}

Eigen::Vector3cd polarization_vector(const Direction& dir, const Polarization& pol) {
    const double sg = std::sin(pol.gamma);
    const double cg = std::cos(pol.gamma);
    const double st = std::sin(dir.theta);
    const double ct = std::cos(dir.theta);
    const double sp = std::sin(dir.phi);
    const double cp = std::cos(dir.phi);
    const std::complex<double> ej = std::exp(kJ * pol.eta);
    return {sg * ct * cp * ej - cg * sp,
            sg * ct * sp * ej - cg * cp,
            -sg * st * ej};
}

Eigen::VectorXcd full_steering(const Direction& dir, const Polarization& pol,
                               std::span<const double> positions_wl) {
    const Eigen::Vector3cd sp = polarization_vector(dir, pol);
    const Eigen::VectorXcd ss = spatial_steering(dir, positions_wl);
    Eigen::VectorXcd s(3 * ss.size());
    for (Eigen::Index m = 0; m < ss.size(); ++m) {
        s.segment<3>(3 * m) = sp * ss[m];
    }
    return s;
}

Eigen::VectorXcd full_steering(const Direction& dir, const Polarization& pol,
                               const CandidateGrid& grid) {
    return full_steering(dir, pol, std::span<const double>(grid.positions()));
}

std::complex<double> array_response(const Eigen::VectorXcd& w_flat,
                                    const Eigen::VectorXcd& steering) {
    if (w_flat.size() != steering.size()) {
        throw std::invalid_argument("array_response: dimension mismatch");
    }
    // Eigen's dot conjugates its first argument: w.dot(s) = sum conj(w_i) s_i.
    return w_flat.dot(steering);
}

std::complex<double> array_response(const WeightVector& w,
                                    const Eigen::VectorXcd& steering) {
    return array_response(w.flatten(), steering);
}

}  // namespace trisynth
