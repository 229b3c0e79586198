#include "trisynth/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace trisynth {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::vector<SidelobeRegion> parse_regions(const std::string& value) {
    std::vector<SidelobeRegion> regions;
    std::stringstream ss(value);
    std::string entry;
    while (std::getline(ss, entry, ',')) {
        entry = trim(entry);
        if (entry.empty()) continue;
        if (entry[0] != '+' && entry[0] != '-') {
            throw ConfigError("config key 'sidelobe_regions': entry '" + entry +
                              "' must start with + or - (phi sign)");
        }
        const int sign = entry[0] == '+' ? 1 : -1;
        const auto colon = entry.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("config key 'sidelobe_regions': entry '" + entry +
                              "' must look like +lo:hi");
        }
        const double lo = parse_double("sidelobe_regions", trim(entry.substr(1, colon - 1)));
        const double hi = parse_double("sidelobe_regions", trim(entry.substr(colon + 1)));
        if (!(lo >= 0.0 && hi <= 90.0 && lo <= hi)) {
            throw ConfigError("config key 'sidelobe_regions': entry '" + entry +
                              "' must satisfy 0 <= lo <= hi <= 90");
        }
        regions.push_back({sign, lo, hi});
    }
    if (regions.empty()) {
        throw ConfigError("config key 'sidelobe_regions': no regions given");
    }
    return regions;
}

void check_range(const std::string& key, double value, double lo, double hi) {
    if (!(value >= lo && value <= hi)) {
        std::ostringstream os;
        os << "config key '" << key << "': value " << value << " outside [" << lo << ", " << hi
           << "]";
        throw ConfigError(os.str());
    }
}

}  // namespace

const char* to_string(DesignMethod method) {
    switch (method) {
        case DesignMethod::Plain: return "plain";
        case DesignMethod::Reweighted: return "reweighted";
        case DesignMethod::Ula: return "ula";
    }
    return "unknown";
}

DesignSpec RunConfig::to_design_spec() const {
    const int M = method == DesignMethod::Ula
                      ? static_cast<int>(std::llround(aperture_wl / ula_spacing_wl)) + 1
                      : num_locations;
    const double spacing = method == DesignMethod::Ula ? ula_spacing_wl
                                                       : aperture_wl / (num_locations - 1);
    return DesignSpec{Direction(theta_ml_deg * kDeg, phi_ml_deg * kDeg),
                      Polarization(gamma_deg * kDeg, eta_deg * kDeg),
                      sidelobe_regions,
                      transition_halfwidth_deg,
                      sidelobe_step_deg,
                      alpha,
                      CandidateGrid(M, spacing)};
}

GroupNormConfig RunConfig::group_config() const {
    GroupNormConfig cfg;
    cfg.epsilon_policy = epsilon_policy;
    cfg.epsilon_value = epsilon_value;
    cfg.prune_threshold = prune_threshold;
    cfg.stop_patience = stop_patience;
    cfg.max_reweight_iters = max_reweight_iters;
    return cfg;
}

SolverOptions RunConfig::solver_options() const {
    SolverOptions opts;
    opts.feas_tol = feas_tol;
    opts.gap_tol = gap_tol;
    opts.max_iters = max_iters;
    return opts;
}

RunConfig parse_run_config_text(const std::string& text) {
    RunConfig cfg;
    std::map<std::string, std::string> kv;

    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": empty key or value");
        }
        if (kv.count(key)) {
            throw ConfigError("config key '" + key + "': given more than once");
        }
        kv[key] = value;
    }

    const auto take = [&kv](const char* key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end()) return "";
        std::string v = it->second;
        kv.erase(it);
        return v;
    };

    if (const std::string v = take("method"); !v.empty()) {
        if (v == "plain") cfg.method = DesignMethod::Plain;
        else if (v == "reweighted") cfg.method = DesignMethod::Reweighted;
        else if (v == "ula") cfg.method = DesignMethod::Ula;
        else throw ConfigError("config key 'method': expected plain|reweighted|ula, got '" + v + "'");
    } else {
        throw ConfigError("config key 'method': required");
    }

    if (const std::string v = take("theta_ml_deg"); !v.empty()) cfg.theta_ml_deg = parse_double("theta_ml_deg", v);
    if (const std::string v = take("phi_ml_deg"); !v.empty()) cfg.phi_ml_deg = parse_double("phi_ml_deg", v);
    if (const std::string v = take("gamma_deg"); !v.empty()) cfg.gamma_deg = parse_double("gamma_deg", v);
    if (const std::string v = take("eta_deg"); !v.empty()) cfg.eta_deg = parse_double("eta_deg", v);
    if (const std::string v = take("alpha"); !v.empty()) cfg.alpha = parse_double("alpha", v);
    if (const std::string v = take("aperture_wl"); !v.empty()) cfg.aperture_wl = parse_double("aperture_wl", v);
    if (const std::string v = take("num_locations"); !v.empty()) cfg.num_locations = parse_int("num_locations", v);
    if (const std::string v = take("ula_spacing_wl"); !v.empty()) cfg.ula_spacing_wl = parse_double("ula_spacing_wl", v);
    if (const std::string v = take("sidelobe_regions"); !v.empty()) cfg.sidelobe_regions = parse_regions(v);
    else throw ConfigError("config key 'sidelobe_regions': required");
    if (const std::string v = take("transition_halfwidth_deg"); !v.empty()) cfg.transition_halfwidth_deg = parse_double("transition_halfwidth_deg", v);
    if (const std::string v = take("sidelobe_step_deg"); !v.empty()) cfg.sidelobe_step_deg = parse_double("sidelobe_step_deg", v);
    if (const std::string v = take("epsilon_policy"); !v.empty()) {
        if (v == "relative") cfg.epsilon_policy = EpsilonPolicy::Relative;
        else if (v == "fixed") cfg.epsilon_policy = EpsilonPolicy::Fixed;
        else throw ConfigError("config key 'epsilon_policy': expected relative|fixed, got '" + v + "'");
    }
    if (const std::string v = take("epsilon_value"); !v.empty()) cfg.epsilon_value = parse_double("epsilon_value", v);
    if (const std::string v = take("prune_threshold"); !v.empty()) cfg.prune_threshold = parse_double("prune_threshold", v);
    if (const std::string v = take("stop_patience"); !v.empty()) cfg.stop_patience = parse_int("stop_patience", v);
    if (const std::string v = take("max_reweight_iters"); !v.empty()) cfg.max_reweight_iters = parse_int("max_reweight_iters", v);
    if (const std::string v = take("feas_tol"); !v.empty()) cfg.feas_tol = parse_double("feas_tol", v);
    if (const std::string v = take("gap_tol"); !v.empty()) cfg.gap_tol = parse_double("gap_tol", v);
    if (const std::string v = take("max_iters"); !v.empty()) cfg.max_iters = parse_int("max_iters", v);
    if (const std::string v = take("sweep_res_deg"); !v.empty()) cfg.sweep_res_deg = parse_double("sweep_res_deg", v);
    if (const std::string v = take("out_dir"); !v.empty()) cfg.out_dir = v;
    if (const std::string v = take("emit_svg"); !v.empty()) cfg.emit_svg = parse_bool("emit_svg", v);

    if (!kv.empty()) {
        throw ConfigError("config key '" + kv.begin()->first + "': unknown key");
    }

    check_range("theta_ml_deg", cfg.theta_ml_deg, 0.0, 90.0);
    check_range("phi_ml_deg", cfg.phi_ml_deg, -90.0, 90.0);
    check_range("gamma_deg", cfg.gamma_deg, 0.0, 90.0);
    if (!(cfg.eta_deg >= -180.0 && cfg.eta_deg < 180.0)) {
        throw ConfigError("config key 'eta_deg': value outside [-180, 180)");
    }
    if (!(cfg.alpha >= 0.0)) throw ConfigError("config key 'alpha': must be nonnegative");
    if (!(cfg.aperture_wl > 0.0)) throw ConfigError("config key 'aperture_wl': must be positive");
    if (cfg.num_locations < 2) throw ConfigError("config key 'num_locations': must be >= 2");
    if (!(cfg.ula_spacing_wl > 0.0)) throw ConfigError("config key 'ula_spacing_wl': must be positive");
    if (!(cfg.transition_halfwidth_deg >= 0.0)) {
        throw ConfigError("config key 'transition_halfwidth_deg': must be nonnegative");
    }
    if (!(cfg.sidelobe_step_deg > 0.0)) {
        throw ConfigError("config key 'sidelobe_step_deg': must be positive");
    }
    if (!(cfg.epsilon_value > 0.0)) throw ConfigError("config key 'epsilon_value': must be positive");
    if (!(cfg.prune_threshold > 0.0 && cfg.prune_threshold < 1.0)) {
        throw ConfigError("config key 'prune_threshold': must lie in (0, 1)");
    }
    if (cfg.stop_patience < 1) throw ConfigError("config key 'stop_patience': must be >= 1");
    if (cfg.max_reweight_iters < 1) {
        throw ConfigError("config key 'max_reweight_iters': must be >= 1");
    }
    if (!(cfg.feas_tol > 0.0)) throw ConfigError("config key 'feas_tol': must be positive");
    if (!(cfg.gap_tol > 0.0)) throw ConfigError("config key 'gap_tol': must be positive");
    if (cfg.max_iters < 1) throw ConfigError("config key 'max_iters': must be >= 1");
    if (!(cfg.sweep_res_deg > 0.0)) throw ConfigError("config key 'sweep_res_deg': must be positive");
    if (cfg.method == DesignMethod::Ula) {
        const double intervals = cfg.aperture_wl / cfg.ula_spacing_wl;
        if (std::abs(intervals - std::llround(intervals)) > 1e-9 * std::max(1.0, intervals)) {
            throw ConfigError(
                "config key 'ula_spacing_wl': must divide aperture_wl into whole intervals");
        }
    }
    return cfg;
}

RunConfig parse_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config file '" + path + "': cannot open");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config_text(buffer.str());
}

std::string format_sidelobe_regions(const std::vector<SidelobeRegion>& regions) {
    std::ostringstream os;
    for (size_t i = 0; i < regions.size(); ++i) {
        if (i) os << ", ";
        os << (regions[i].phi_sign >= 0 ? '+' : '-');
        os << regions[i].theta_lo_deg << ':' << regions[i].theta_hi_deg;
    }
    return os.str();
}

}  // namespace trisynth
