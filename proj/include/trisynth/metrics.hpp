#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "trisynth/array_model.hpp"
#include "trisynth/pattern_grid.hpp"
#include "trisynth/sparse_design.hpp"

namespace trisynth {

/// Normalized power pattern over the signed-theta sweep: signed theta >= 0
/// means (theta, phi = +90 deg), signed theta < 0 means (|theta|, phi = -90
/// deg). The maximum is 0 dB; a -120 dB floor stands in for log of zero.
struct PatternPoint {
    double signed_theta_deg = 0.0;
    double magnitude_db = 0.0;
};

struct PatternSweep {
    std::vector<PatternPoint> points;
    double resolution_deg = 0.0;
};

inline constexpr double kDbFloor = -120.0;

PatternSweep sweep_pattern_serial(const WeightVector& w, std::span<const double> positions_wl,
                                  const Polarization& pol, double resolution_deg);
PatternSweep sweep_pattern(const WeightVector& w, std::span<const double> positions_wl,
                           const Polarization& pol, double resolution_deg);

/// Peak level (dB) over all sweep points inside the closed signed-theta
/// intervals. Rejects an empty interval set.
double compute_psl(const PatternSweep& sweep,
                   const std::vector<std::pair<double, double>>& sidelobe_intervals);

/// Signed theta of the sweep maximum; ties break toward the smallest
/// |theta|, then toward the positive sign.
double mainlobe_location(const PatternSweep& sweep);

struct Separations {
    double aperture_wl = 0.0;
    double mean_wl = 0.0;
    double min_wl = 0.0;
};

/// Requires at least two positions; callers report absent otherwise.
Separations compute_separations(std::span<const double> active_positions);

struct MetricBundle {
    int num_tripoles = 0;
    std::optional<double> aperture_wl;
    std::optional<double> mean_sep_wl;
    std::optional<double> min_sep_wl;
    double mainlobe_deg = 0.0;
    double psl_db = kDbFloor;
    double residual = 0.0;
};

/// Full report bundle for a design outcome: sweeps the (pruned) full-grid
/// weights, extracts PSL over the spec's carved sidelobe intervals, and
/// attaches the separation statistics of the active positions.
MetricBundle compute_metrics(const DesignResult& result, const DesignSpec& spec,
                             double sweep_resolution_deg);

}  // namespace trisynth
