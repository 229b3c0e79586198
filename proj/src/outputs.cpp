#include "trisynth/outputs.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace trisynth {

namespace {
namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};
}  // namespace

std::string fmt_g12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string fmt_exact(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::vector<LocationRow> make_location_rows(const DesignResult& result,
                                            const CandidateGrid& grid) {
    std::vector<LocationRow> rows;
    rows.reserve(result.active_indices.size());
    for (int m : result.active_indices) {
        LocationRow row;
        row.index = m;
        row.position_wl = grid.positions()[m];
        for (int axis = 0; axis < 3; ++axis) {
            row.magnitude[axis] = std::abs(result.weights.triples[m][axis]);
            row.phase_rad[axis] = std::arg(result.weights.triples[m][axis]);
        }
        rows.push_back(row);
    }
    return rows;
}

WeightVector weights_from_rows(const std::vector<LocationRow>& rows,
                               const CandidateGrid& grid) {
    WeightVector w(grid.num_locations());
    int prev = -1;
    for (const LocationRow& row : rows) {
        if (row.index < 0 || row.index >= grid.num_locations()) {
            throw ConfigError("weights row index " + std::to_string(row.index) +
                              " outside the grid (M=" + std::to_string(grid.num_locations()) + ")");
        }
        if (row.index <= prev) {
            throw ConfigError("weights rows must have strictly increasing indices");
        }
        prev = row.index;
        if (std::abs(row.position_wl - grid.positions()[row.index]) > 1e-9) {
            throw ConfigError("weights row " + std::to_string(row.index) +
                              ": position does not match the grid");
        }
        for (int axis = 0; axis < 3; ++axis) {
            if (row.magnitude[axis] < 0.0) {
                throw ConfigError("weights row " + std::to_string(row.index) +
                                  ": negative magnitude");
            }
            w.triples[row.index][axis] = std::polar(row.magnitude[axis], row.phase_rad[axis]);
        }
    }
    return w;
}

namespace {
const char* kLocationsHeader =
    "index,position_wl,abs_wx,abs_wy,abs_wz,phase_wx_rad,phase_wy_rad,phase_wz_rad";

double parse_field(const std::string& field, int lineno) {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ConfigError("weights csv line " + std::to_string(lineno) +
                          ": malformed number '" + field + "'");
    }
    return v;
}
}  // namespace

void write_locations_csv(const std::string& path, const std::vector<LocationRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    out << kLocationsHeader << "\n";
    for (const LocationRow& row : rows) {
        out << row.index << ',' << fmt_exact(row.position_wl);
        for (int axis = 0; axis < 3; ++axis) out << ',' << fmt_exact(row.magnitude[axis]);
        for (int axis = 0; axis < 3; ++axis) out << ',' << fmt_exact(row.phase_rad[axis]);
        out << "\n";
    }
}

std::vector<LocationRow> read_locations_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("weights csv '" + path + "': cannot open");
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) {
        throw ConfigError("weights csv line 1: missing header");
    }
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kLocationsHeader) {
        throw ConfigError("weights csv line 1: unexpected header");
    }
    std::vector<LocationRow> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 8) {
            throw ConfigError("weights csv line " + std::to_string(lineno) +
                              ": expected 8 fields, got " + std::to_string(fields.size()));
        }
        LocationRow row;
        row.index = static_cast<int>(parse_field(fields[0], lineno));
        row.position_wl = parse_field(fields[1], lineno);
        for (int axis = 0; axis < 3; ++axis) row.magnitude[axis] = parse_field(fields[2 + axis], lineno);
        for (int axis = 0; axis < 3; ++axis) row.phase_rad[axis] = parse_field(fields[5 + axis], lineno);
        rows.push_back(row);
    }
    return rows;
}

void write_pattern_csv(const std::string& path, const PatternSweep& sweep) {
    std::ofstream out(path, std::ios::binary);
    out << "signed_theta_deg,magnitude_db\n";
    for (const PatternPoint& pt : sweep.points) {
        out << fmt_g12(pt.signed_theta_deg) << ',' << fmt_g12(pt.magnitude_db) << "\n";
    }
}

void write_comparison_csv(const std::string& path, const std::vector<ComparisonRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    out << "method,status,num_tripoles,aperture_wl,mean_sep_wl,min_sep_wl,"
           "mainlobe_deg,psl_db,residual\n";
    const auto opt = [](const std::optional<double>& v) {
        return v ? fmt_g12(*v) : std::string();
    };
    for (const ComparisonRow& row : rows) {
        out << row.method << ',' << row.status << ',';
        if (row.metrics) {
            out << row.metrics->num_tripoles << ',' << opt(row.metrics->aperture_wl) << ','
                << opt(row.metrics->mean_sep_wl) << ',' << opt(row.metrics->min_sep_wl) << ','
                << fmt_g12(row.metrics->mainlobe_deg) << ',' << fmt_g12(row.metrics->psl_db)
                << ',' << fmt_g12(row.metrics->residual);
        } else {
            out << ",,,,,,";
        }
        out << "\n";
    }
}

void write_pattern_comparison_csv(const std::string& path,
                                  const std::vector<PatternSeries>& series) {
    std::ofstream out(path, std::ios::binary);
    out << "signed_theta_deg";
    for (const PatternSeries& s : series) out << ',' << s.label << "_db";
    out << "\n";
    size_t npts = 0;
    const PatternSweep* ref = nullptr;
    for (const PatternSeries& s : series) {
        if (s.sweep) {
            ref = s.sweep;
            npts = s.sweep->points.size();
            break;
        }
    }
    if (!ref) return;
    for (size_t i = 0; i < npts; ++i) {
        out << fmt_g12(ref->points[i].signed_theta_deg);
        for (const PatternSeries& s : series) {
            out << ',';
            if (s.sweep) out << fmt_g12(s.sweep->points[i].magnitude_db);
        }
        out << "\n";
    }
}

void write_pattern_svg(const std::string& path, const std::vector<PatternSeries>& series,
                       const std::string& title) {
    constexpr double width = 920, height = 600;
    constexpr double x0 = 70, x1 = 880, y0 = 50, y1 = 540;
    constexpr double db_top = 0.0, db_bot = -80.0;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};

    const auto map_x = [&](double deg) { return x0 + (deg + 90.0) / 180.0 * (x1 - x0); };
    const auto map_y = [&](double db) {
        const double clamped = std::clamp(db, db_bot, db_top);
        return y0 + (db_top - clamped) / (db_top - db_bot) * (y1 - y0);
    };

    std::ofstream out(path, std::ios::binary);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << (width / 2) << "\" y=\"28\" font-size=\"16\" text-anchor=\"middle\">"
        << title << "</text>\n";
    char buf[256];
    for (int deg = -90; deg <= 90; deg += 30) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n",
                      map_x(deg), y0, map_x(deg), y1);
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"middle\">%d</text>\n",
                      map_x(deg), y1 + 16.0, deg);
        out << buf;
    }
    for (int db = 0; db >= -80; db -= 10) {
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n",
                      x0, map_y(db), x1, map_y(db));
        out << buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%d</text>\n",
                      x0 - 6.0, map_y(db) + 4.0, db);
        out << buf;
    }
    out << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << (x1 - x0) << "\" height=\""
        << (y1 - y0) << "\" fill=\"none\" stroke=\"black\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\">signed theta (deg)</text>\n",
                  (x0 + x1) / 2, height - 18.0);
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"18\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 18 %.2f)\">magnitude (dB)</text>\n",
                  (y0 + y1) / 2, (y0 + y1) / 2);
    out << buf;

    int color_idx = 0;
    double legend_y = y0 + 18;
    for (const PatternSeries& s : series) {
        const char* color = colors[color_idx % 4];
        ++color_idx;
        if (!s.sweep) continue;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.3\" points=\"";
        for (const PatternPoint& pt : s.sweep->points) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", map_x(pt.signed_theta_deg),
                          map_y(pt.magnitude_db));
            out << buf;
        }
        out << "\"/>\n";
        std::snprintf(buf, sizeof(buf),
                      "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" "
                      "stroke-width=\"2\"/><text x=\"%.2f\" y=\"%.2f\" font-size=\"12\">%s</text>\n",
                      x1 - 150.0, legend_y, x1 - 120.0, legend_y, color, x1 - 112.0,
                      legend_y + 4.0, s.label.c_str());
        out << buf;
        legend_y += 18;
    }
    out << "</svg>\n";
}

namespace {

ordered_json config_echo(const RunConfig& cfg) {
    ordered_json j;
    j["method"] = to_string(cfg.method);
    j["theta_ml_deg"] = cfg.theta_ml_deg;
    j["phi_ml_deg"] = cfg.phi_ml_deg;
    j["gamma_deg"] = cfg.gamma_deg;
    j["eta_deg"] = cfg.eta_deg;
    j["alpha"] = cfg.alpha;
    j["aperture_wl"] = cfg.aperture_wl;
    j["num_locations"] = cfg.num_locations;
    j["ula_spacing_wl"] = cfg.ula_spacing_wl;
    j["sidelobe_regions"] = format_sidelobe_regions(cfg.sidelobe_regions);
    j["transition_halfwidth_deg"] = cfg.transition_halfwidth_deg;
    j["sidelobe_step_deg"] = cfg.sidelobe_step_deg;
    j["epsilon_policy"] = cfg.epsilon_policy == EpsilonPolicy::Relative ? "relative" : "fixed";
    j["epsilon_value"] = cfg.epsilon_value;
    j["prune_threshold"] = cfg.prune_threshold;
    j["stop_patience"] = cfg.stop_patience;
    j["max_reweight_iters"] = cfg.max_reweight_iters;
    j["feas_tol"] = cfg.feas_tol;
    j["gap_tol"] = cfg.gap_tol;
    j["max_iters"] = cfg.max_iters;
    j["sweep_res_deg"] = cfg.sweep_res_deg;
    return j;
}

ordered_json metrics_to_json(const MetricBundle& m) {
    ordered_json j;
    j["num_tripoles"] = m.num_tripoles;
    j["aperture_wl"] = m.aperture_wl ? ordered_json(*m.aperture_wl) : ordered_json(nullptr);
    j["mean_sep_wl"] = m.mean_sep_wl ? ordered_json(*m.mean_sep_wl) : ordered_json(nullptr);
    j["min_sep_wl"] = m.min_sep_wl ? ordered_json(*m.min_sep_wl) : ordered_json(nullptr);
    j["mainlobe_deg"] = m.mainlobe_deg;
    j["psl_db"] = m.psl_db;
    j["residual"] = m.residual;
    return j;
}

}  // namespace

std::string render_metrics_json(const RunConfig& cfg, const MetricBundle& metrics,
                                const std::optional<ReweightTrace>& trace,
                                const std::vector<std::string>& warnings) {
    ordered_json j;
    j["config"] = config_echo(cfg);
    j["metrics"] = metrics_to_json(metrics);
    if (!warnings.empty()) j["warnings"] = warnings;
    if (trace) {
        ordered_json arr = ordered_json::array();
        for (const ReweightIteration& it : trace->iterations) {
            ordered_json entry;
            entry["k"] = it.k;
            entry["active_count"] = it.active_count;
            entry["residual"] = it.residual;
            entry["objective"] = it.objective;
            entry["delta_min"] = it.delta.minCoeff();
            entry["delta_max"] = it.delta.maxCoeff();
            arr.push_back(entry);
        }
        j["trace"] = arr;
    }
    return j.dump(2) + "\n";
}

namespace {

RunConfig apply_overrides(RunConfig cfg, const CliOptions& cli) {
    if (cli.out_dir) cfg.out_dir = *cli.out_dir;
    if (cli.sweep_res_deg) {
        if (!(*cli.sweep_res_deg > 0.0)) {
            throw ConfigError("--sweep-res-deg: must be positive");
        }
        cfg.sweep_res_deg = *cli.sweep_res_deg;
    }
    return cfg;
}

DesignResult run_method(DesignMethod method, const RunConfig& cfg, const DesignSpec& spec,
                        bool verbose) {
    Timer timer;
    DesignResult result;
    switch (method) {
        case DesignMethod::Plain:
            result = design_group_sparse(spec, cfg.solver_options(), cfg.prune_threshold);
            break;
        case DesignMethod::Reweighted:
            result = design_reweighted(spec, cfg.group_config(), cfg.solver_options());
            break;
        case DesignMethod::Ula:
            result = design_ula_reference(cfg.aperture_wl, cfg.ula_spacing_wl, spec,
                                          cfg.solver_options());
            break;
    }
    if (verbose) {
        std::cerr << "[trisynth] " << to_string(method) << ": " << to_string(result.status)
                  << ", " << result.active_indices.size() << " active tripoles, "
                  << fmt_g12(timer.seconds()) << " s\n";
    }
    return result;
}

double recompute_residual(const DesignSpec& spec, const WeightVector& w) {
    const SampledPattern pattern = build_samples(spec);
    Eigen::VectorXcd p_r;
    Eigen::MatrixXcd S;
    assemble_matrices(pattern, spec.grid, p_r, S);
    return complex_residual(p_r, S, w);
}

/// Replaces the solved weights with their (magnitude, phase) row encoding so
/// that the reported metrics match exactly what a consumer reads back from
/// disk. The CSV stores rows with shortest-round-trip floats, so the file
/// round trip itself is lossless.
void quantize_through_rows(DesignResult& result, const DesignSpec& spec,
                           std::vector<LocationRow>& rows) {
    rows = make_location_rows(result, spec.grid);
    result.weights = weights_from_rows(rows, spec.grid);
    result.residual = recompute_residual(spec, result.weights);
}

int status_exit_code(DesignStatus status) {
    switch (status) {
        case DesignStatus::Success: return 0;
        case DesignStatus::Infeasible: return 2;
        case DesignStatus::IterationLimit: return 3;
    }
    return 1;
}

}  // namespace

int cmd_design(const std::string& config_path, const CliOptions& cli) {
    RunConfig cfg;
    try {
        cfg = apply_overrides(parse_run_config(config_path), cli);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const DesignSpec spec = cfg.to_design_spec();
    DesignResult result = run_method(cfg.method, cfg, spec, cli.verbose);
    if (result.status != DesignStatus::Success) {
        std::cerr << "error: design " << to_string(result.status) << " (alpha=" << cfg.alpha
                  << ")\n";
        return status_exit_code(result.status);
    }

    std::vector<LocationRow> rows;
    quantize_through_rows(result, spec, rows);
    const MetricBundle metrics = compute_metrics(result, spec, cfg.sweep_res_deg);
    const PatternSweep sweep = sweep_pattern(result.weights, spec.grid.positions(),
                                             spec.polarization, cfg.sweep_res_deg);

    std::vector<std::string> warnings;
    if (result.active_indices.empty()) {
        warnings.push_back("design has zero active tripoles");
        std::cerr << "warning: design has zero active tripoles (alpha >= ||p_r||)\n";
    }

    fs::create_directories(cfg.out_dir);
    write_locations_csv((fs::path(cfg.out_dir) / "locations.csv").string(), rows);
    write_pattern_csv((fs::path(cfg.out_dir) / "pattern.csv").string(), sweep);
    std::ofstream((fs::path(cfg.out_dir) / "metrics.json").string(), std::ios::binary)
        << render_metrics_json(cfg, metrics, result.trace, warnings);
    if (cfg.emit_svg) {
        write_pattern_svg((fs::path(cfg.out_dir) / "pattern.svg").string(),
                          {{to_string(cfg.method), &sweep}}, "designed pattern");
    }
    return 0;
}

int cmd_compare(const std::string& config_path, const CliOptions& cli) {
    RunConfig cfg;
    try {
        cfg = apply_overrides(parse_run_config(config_path), cli);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const DesignMethod methods[] = {DesignMethod::Plain, DesignMethod::Reweighted,
                                    DesignMethod::Ula};
    std::vector<ComparisonRow> rows;
    std::vector<PatternSweep> sweeps(3);
    std::vector<PatternSeries> series;
    bool any_success = false;

    for (int i = 0; i < 3; ++i) {
        RunConfig leg_cfg = cfg;
        leg_cfg.method = methods[i];
        const DesignSpec spec = leg_cfg.to_design_spec();
        DesignResult result = run_method(methods[i], leg_cfg, spec, cli.verbose);
        ComparisonRow row;
        row.method = to_string(methods[i]);
        row.status = to_string(result.status);
        if (result.status == DesignStatus::Success) {
            any_success = true;
            std::vector<LocationRow> loc_rows;
            quantize_through_rows(result, spec, loc_rows);
            row.metrics = compute_metrics(result, spec, cfg.sweep_res_deg);
            sweeps[i] = sweep_pattern(result.weights, spec.grid.positions(), spec.polarization,
                                      cfg.sweep_res_deg);
            series.push_back({to_string(methods[i]), &sweeps[i]});
        } else {
            series.push_back({to_string(methods[i]), nullptr});
        }
        rows.push_back(std::move(row));
    }

    fs::create_directories(cfg.out_dir);
    write_comparison_csv((fs::path(cfg.out_dir) / "comparison.csv").string(), rows);
    write_pattern_comparison_csv((fs::path(cfg.out_dir) / "pattern_comparison.csv").string(),
                                 series);
    if (cfg.emit_svg) {
        write_pattern_svg((fs::path(cfg.out_dir) / "pattern_comparison.svg").string(), series,
                          "design comparison");
    }
    return any_success ? 0 : 2;
}

int cmd_sweep_only(const std::string& weights_csv, const std::string& config_path,
                   const CliOptions& cli) {
    RunConfig cfg;
    std::vector<LocationRow> rows;
    DesignResult result;
    std::optional<DesignSpec> spec_opt;
    try {
        cfg = apply_overrides(parse_run_config(config_path), cli);
        spec_opt = cfg.to_design_spec();
        rows = read_locations_csv(weights_csv);
        result.weights = weights_from_rows(rows, spec_opt->grid);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    const DesignSpec& spec = *spec_opt;
    result.status = DesignStatus::Success;
    for (const LocationRow& row : rows) {
        result.active_indices.push_back(row.index);
        result.active_positions.push_back(spec.grid.positions()[row.index]);
    }
    result.residual = recompute_residual(spec, result.weights);

    const MetricBundle metrics = compute_metrics(result, spec, cfg.sweep_res_deg);
    const PatternSweep sweep = sweep_pattern(result.weights, spec.grid.positions(),
                                             spec.polarization, cfg.sweep_res_deg);
    std::vector<std::string> warnings;
    if (result.active_indices.empty()) warnings.push_back("design has zero active tripoles");

    fs::create_directories(cfg.out_dir);
    write_pattern_csv((fs::path(cfg.out_dir) / "pattern.csv").string(), sweep);
    std::ofstream((fs::path(cfg.out_dir) / "metrics.json").string(), std::ios::binary)
        << render_metrics_json(cfg, metrics, std::nullopt, warnings);
    return 0;
}

}  // namespace trisynth
