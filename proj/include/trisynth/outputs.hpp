#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "trisynth/metrics.hpp"
#include "trisynth/run_config.hpp"
#include "trisynth/sparse_design.hpp"

namespace trisynth {

/// %.12g, used for derived values in CSVs.
std::string fmt_g12(double v);
/// Shortest round-trip representation; reads back to the identical double.
/// Used for weight columns so that a design can be re-swept bit-identically.
std::string fmt_exact(double v);

struct LocationRow {
    int index = 0;
    double position_wl = 0.0;
    std::array<double, 3> magnitude{};
    std::array<double, 3> phase_rad{};
};

std::vector<LocationRow> make_location_rows(const DesignResult& result,
                                            const CandidateGrid& grid);

/// Rebuilds full-grid weights from rows; validates indices and positions
/// against the grid. Throws ConfigError on mismatch.
WeightVector weights_from_rows(const std::vector<LocationRow>& rows,
                               const CandidateGrid& grid);

void write_locations_csv(const std::string& path, const std::vector<LocationRow>& rows);
/// Throws ConfigError naming the offending line on malformed input.
std::vector<LocationRow> read_locations_csv(const std::string& path);

void write_pattern_csv(const std::string& path, const PatternSweep& sweep);

struct ComparisonRow {
    std::string method;
    std::string status;
    std::optional<MetricBundle> metrics;
};

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows);

struct PatternSeries {
    std::string label;
    const PatternSweep* sweep = nullptr;  // null for a failed leg
};

void write_pattern_comparison_csv(const std::string& path,
                                  const std::vector<PatternSeries>& series);

void write_pattern_svg(const std::string& path, const std::vector<PatternSeries>& series,
                       const std::string& title);

/// metrics.json payload: resolved config echo, metric bundle, derivable
/// warnings and (for reweighted designs) the iteration trace.
std::string render_metrics_json(const RunConfig& cfg, const MetricBundle& metrics,
                                const std::optional<ReweightTrace>& trace,
                                const std::vector<std::string>& warnings);

struct CliOptions {
    std::optional<std::string> out_dir;
    std::optional<double> sweep_res_deg;
    bool verbose = false;
    bool seedless = false;  // reserved; the pipeline has no randomness
};

/// Exit codes: 0 success, 1 usage/config error, 2 infeasible design,
/// 3 solver iteration budget exhausted.
int cmd_design(const std::string& config_path, const CliOptions& cli = {});
int cmd_compare(const std::string& config_path, const CliOptions& cli = {});
int cmd_sweep_only(const std::string& weights_csv, const std::string& config_path,
                   const CliOptions& cli = {});

}  // namespace trisynth
