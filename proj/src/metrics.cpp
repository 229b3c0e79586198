#include "trisynth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace trisynth {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kContainEps = 1e-9;

double response_magnitude(const Eigen::VectorXcd& w_flat, std::span<const double> positions_wl,
                          const Polarization& pol, double signed_theta_deg) {
    const double theta = std::min(std::abs(signed_theta_deg), 90.0) * kDeg;
    const double phi = (signed_theta_deg >= 0.0 ? 90.0 : -90.0) * kDeg;
    const Direction dir(theta, phi);
    return std::abs(array_response(w_flat, full_steering(dir, pol, positions_wl)));
}

PatternSweep sweep_impl(const WeightVector& w, std::span<const double> positions_wl,
                        const Polarization& pol, double resolution_deg, bool parallel) {
    if (w.size() == 0 || positions_wl.empty()) {
        throw std::invalid_argument("sweep_pattern: empty weight set");
    }
    if (static_cast<size_t>(w.size()) != positions_wl.size()) {
        throw std::invalid_argument("sweep_pattern: weights and positions disagree");
    }
    if (!(resolution_deg > 0.0)) {
        throw std::invalid_argument("sweep_pattern: resolution must be positive");
    }

    const int npts = static_cast<int>(std::floor(180.0 / resolution_deg + 1e-9)) + 1;
    const Eigen::VectorXcd w_flat = w.flatten();

    std::vector<double> mags(npts);
    std::vector<double> angles(npts);
#pragma omp parallel for schedule(static) if (parallel)
    for (int i = 0; i < npts; ++i) {
        const double signed_deg = std::clamp(-90.0 + i * resolution_deg, -90.0, 90.0);
        angles[i] = signed_deg;
        mags[i] = response_magnitude(w_flat, positions_wl, pol, signed_deg);
    }

    double max_mag = 0.0;
    for (double m : mags) max_mag = std::max(max_mag, m);

    PatternSweep sweep;
    sweep.resolution_deg = resolution_deg;
    sweep.points.resize(npts);
    for (int i = 0; i < npts; ++i) {
        double db = kDbFloor;
        if (max_mag > 0.0 && mags[i] > 0.0) {
            db = std::max(20.0 * std::log10(mags[i] / max_mag), kDbFloor);
        }
        sweep.points[i] = {angles[i], db};
    }
    return sweep;
}
}  // namespace

PatternSweep sweep_pattern_serial(const WeightVector& w, std::span<const double> positions_wl,
                                  const Polarization& pol, double resolution_deg) {
    return sweep_impl(w, positions_wl, pol, resolution_deg, false);
}

PatternSweep sweep_pattern(const WeightVector& w, std::span<const double> positions_wl,
                           const Polarization& pol, double resolution_deg) {
    return sweep_impl(w, positions_wl, pol, resolution_deg, true);
}

double compute_psl(const PatternSweep& sweep,
                   const std::vector<std::pair<double, double>>& sidelobe_intervals) {
    if (sidelobe_intervals.empty()) {
        throw std::invalid_argument("compute_psl: empty sidelobe region set");
    }
    double psl = kDbFloor;
    for (const PatternPoint& pt : sweep.points) {
        for (const auto& [lo, hi] : sidelobe_intervals) {
            if (pt.signed_theta_deg >= lo - kContainEps &&
                pt.signed_theta_deg <= hi + kContainEps) {
                psl = std::max(psl, pt.magnitude_db);
                break;
            }
        }
    }
    return psl;
}

double mainlobe_location(const PatternSweep& sweep) {
    if (sweep.points.empty()) {
        throw std::invalid_argument("mainlobe_location: empty sweep");
    }
    double best_theta = sweep.points.front().signed_theta_deg;
    double best_db = sweep.points.front().magnitude_db;
    for (const PatternPoint& pt : sweep.points) {
        bool better = pt.magnitude_db > best_db;
        if (pt.magnitude_db == best_db) {
            const double a = std::abs(pt.signed_theta_deg);
            const double b = std::abs(best_theta);
            better = a < b || (a == b && pt.signed_theta_deg > best_theta);
        }
        if (better) {
            best_db = pt.magnitude_db;
            best_theta = pt.signed_theta_deg;
        }
    }
    return best_theta;
}

Separations compute_separations(std::span<const double> active_positions) {
    if (active_positions.size() < 2) {
        throw std::invalid_argument("compute_separations: need at least two positions");
    }
    Separations sep;
    sep.aperture_wl = active_positions.back() - active_positions.front();
    sep.mean_wl = sep.aperture_wl / (static_cast<double>(active_positions.size()) - 1.0);
    sep.min_wl = std::numeric_limits<double>::infinity();
    for (size_t i = 1; i < active_positions.size(); ++i) {
        sep.min_wl = std::min(sep.min_wl, active_positions[i] - active_positions[i - 1]);
    }
    return sep;
}

MetricBundle compute_metrics(const DesignResult& result, const DesignSpec& spec,
                             double sweep_resolution_deg) {
    MetricBundle bundle;
    bundle.num_tripoles = static_cast<int>(result.active_indices.size());
    bundle.residual = result.residual;

    const PatternSweep sweep = sweep_pattern(result.weights, spec.grid.positions(),
                                             spec.polarization, sweep_resolution_deg);
    bundle.mainlobe_deg = mainlobe_location(sweep);
    bundle.psl_db = compute_psl(sweep, carved_sidelobe_intervals(spec));

    if (result.active_positions.size() >= 2) {
        const Separations sep = compute_separations(result.active_positions);
        bundle.aperture_wl = sep.aperture_wl;
        bundle.mean_sep_wl = sep.mean_wl;
        bundle.min_sep_wl = sep.min_wl;
    }
    return bundle;
}

}  // namespace trisynth
