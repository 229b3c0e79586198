#pragma once

#include <vector>

#include <Eigen/Dense>

#include "trisynth/array_model.hpp"

namespace trisynth {

/// One sidelobe band: theta in [theta_lo_deg, theta_hi_deg] on the
/// phi = sign * 90 degree half plane. Externally the band maps to signed
/// theta = sign * theta.
struct SidelobeRegion {
    int phi_sign;  // +1 or -1
    double theta_lo_deg;
    double theta_hi_deg;
};

struct DesignSpec {
    Direction mainlobe;
    Polarization polarization;
    std::vector<SidelobeRegion> sidelobe_regions;
    double transition_halfwidth_deg = 0.0;
    double sidelobe_step_deg = 1.0;
    double alpha = 0.5;
    CandidateGrid grid;
};

/// Signed sweep angle of the mainlobe: sign follows phi_ML.
double mainlobe_signed_deg(const DesignSpec& spec);

/// Sidelobe bands as closed signed-theta intervals with the open transition
/// window around the mainlobe carved out. Used both for constraint sampling
/// and for PSL evaluation.
std::vector<std::pair<double, double>> carved_sidelobe_intervals(const DesignSpec& spec);

struct PatternSample {
    Direction dir;
    Polarization pol;
    double signed_theta_deg;
};

/// Sample list with the mainlobe first; reference is 1 at the mainlobe
/// sample and 0 at every sidelobe sample.
struct SampledPattern {
    std::vector<PatternSample> samples;
    Eigen::VectorXcd reference;

    int count() const { return static_cast<int>(samples.size()); }
};

SampledPattern build_samples(const DesignSpec& spec);

/// Reference vector p_r and steering matrix S (L x 3M): row l is the full
/// steering vector at sample l. The parallel version splits rows across
/// threads; each row is written independently so results are bit-identical
/// to the serial reference.
void assemble_matrices_serial(const SampledPattern& pattern, const CandidateGrid& grid,
                              Eigen::VectorXcd& p_r, Eigen::MatrixXcd& S);
void assemble_matrices(const SampledPattern& pattern, const CandidateGrid& grid,
                       Eigen::VectorXcd& p_r, Eigen::MatrixXcd& S);

/// Real-valued lift of (p_r, S) with one slack slot per location:
/// variable layout per location m is
///   [t_m, Re wx, Re wy, Re wz, -Im wx, -Im wy, -Im wz]
/// so that || p_r - S w^H ||_2 = || p_hat - S_hat w_hat^T ||_2 for any
/// complex w and any values in the t slots (their columns are zero), and
/// c_hat selects exactly the t slots.
struct LiftedSystem {
    Eigen::VectorXd p_hat;  // 2L
    Eigen::MatrixXd S_hat;  // 2L x 7M
    Eigen::VectorXd c_hat;  // 7M
};

LiftedSystem lift_to_real(const Eigen::VectorXcd& p_r, const Eigen::MatrixXcd& S);

/// Inverse of the lift for the weight entries: block m of w_hat yields
/// w_a = w_hat[7m+1+a] - j * w_hat[7m+4+a].
WeightVector weights_from_lifted(const Eigen::VectorXd& w_hat);

/// Number of lifted variables per location.
inline constexpr int kLiftedBlock = 7;

}  // namespace trisynth
