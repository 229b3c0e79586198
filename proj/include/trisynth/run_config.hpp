#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "trisynth/conic_solver.hpp"
#include "trisynth/pattern_grid.hpp"
#include "trisynth/sparse_design.hpp"

namespace trisynth {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DesignMethod { Plain, Reweighted, Ula };

const char* to_string(DesignMethod method);

/// Flat key = value design configuration. Keys carry their units
/// (theta_ml_deg, aperture_wl, ...); unknown keys are rejected.
struct RunConfig {
    DesignMethod method = DesignMethod::Plain;

    double theta_ml_deg = 0.0;
    double phi_ml_deg = 90.0;
    double gamma_deg = 55.0;
    double eta_deg = 100.0;
    double alpha = 0.5;

    double aperture_wl = 10.0;
    int num_locations = 301;
    double ula_spacing_wl = 0.5;

    std::vector<SidelobeRegion> sidelobe_regions;
    double transition_halfwidth_deg = 0.0;
    double sidelobe_step_deg = 1.0;

    EpsilonPolicy epsilon_policy = EpsilonPolicy::Relative;
    double epsilon_value = 1e-3;
    double prune_threshold = 1e-3;
    int stop_patience = 3;
    int max_reweight_iters = 20;

    double feas_tol = 1e-7;
    double gap_tol = 1e-6;
    int max_iters = 10000;

    double sweep_res_deg = 0.2;
    std::string out_dir = ".";
    bool emit_svg = false;

    DesignSpec to_design_spec() const;
    GroupNormConfig group_config() const;
    SolverOptions solver_options() const;
};

/// Parses and validates a config file; throws ConfigError naming the failing
/// key or line.
RunConfig parse_run_config(const std::string& path);
RunConfig parse_run_config_text(const std::string& text);

/// Serialization of sidelobe regions in the config syntax (+lo:hi, -lo:hi).
std::string format_sidelobe_regions(const std::vector<SidelobeRegion>& regions);

}  // namespace trisynth
