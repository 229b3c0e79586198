#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace trisynth {

// All lengths are in wavelengths (the carrier wavelength is normalized to 1).
// Angles are radians everywhere inside the library; degrees only exist at the
// CLI boundary.

/// Arrival direction of a plane wave, theta in [0, pi/2], phi in [-pi/2, pi/2].
struct Direction {
    double theta;
    double phi;

    Direction(double theta_rad, double phi_rad);
};

/// Polarization state: auxiliary angle gamma in [0, pi/2] and phase
/// difference eta in [-pi, pi).
struct Polarization {
    double gamma;
    double eta;

    Polarization(double gamma_rad, double eta_rad);
};

/// Uniform grid of M candidate tripole locations on the y-axis,
/// positions[m] = m * spacing.
class CandidateGrid {
  public:
    CandidateGrid(int num_locations, double spacing_wl);

    int num_locations() const { return static_cast<int>(positions_.size()); }
    double spacing() const { return spacing_; }
    const std::vector<double>& positions() const { return positions_; }
    double aperture() const { return positions_.back(); }

  private:
    double spacing_;
    std::vector<double> positions_;
};

/// Per-location complex weight triples (x, y, z dipole of each tripole).
/// The flattened layout interleaves by location: [wx1, wy1, wz1, wx2, ...].
struct WeightVector {
    std::vector<Eigen::Vector3cd> triples;

    WeightVector() = default;
    explicit WeightVector(int num_locations)
        : triples(num_locations, Eigen::Vector3cd::Zero()) {}

    int size() const { return static_cast<int>(triples.size()); }
    double group_norm(int m) const { return triples[m].norm(); }

    Eigen::VectorXcd flatten() const;
    static WeightVector from_flat(const Eigen::VectorXcd& flat);
};

/// Spatial phase factors exp(-j*2*pi*p*sin(theta)*sin(phi)) for explicit
/// positions p (wavelengths).
Eigen::VectorXcd spatial_steering(const Direction& dir,
                                  std::span<const double> positions_wl);
Eigen::VectorXcd spatial_steering(const Direction& dir, const CandidateGrid& grid);

/// Per-axis dipole responses (s_px, s_py, s_pz) for a plane wave with the
/// given direction and polarization. Note the minus sign on the cos(gamma)
/// terms in the x and y components; in particular the y component is
/// sin(gamma)*cos(theta)*sin(phi)*e^{j eta} - cos(gamma)*cos(phi), where some
/// other conventions carry + cos(gamma)*cos(phi). The sign only matters when
/// comparing against externally generated patterns; everything in this
/// library is internally consistent.
Eigen::Vector3cd polarization_vector(const Direction& dir, const Polarization& pol);

/// Full 3M steering vector, interleaved by location:
/// entries (3m, 3m+1, 3m+2) = (s_px, s_py, s_pz) * s_s[m].
Eigen::VectorXcd full_steering(const Direction& dir, const Polarization& pol,
                               std::span<const double> positions_wl);
Eigen::VectorXcd full_steering(const Direction& dir, const Polarization& pol,
                               const CandidateGrid& grid);

/// Array response s * w^H = sum_i s[i] * conj(w[i]).
std::complex<double> array_response(const Eigen::VectorXcd& w_flat,
                                    const Eigen::VectorXcd& steering);
std::complex<double> array_response(const WeightVector& w,
                                    const Eigen::VectorXcd& steering);

}  // namespace trisynth
