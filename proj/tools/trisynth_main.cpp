#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "trisynth/outputs.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Sparse tripole array synthesis via group-sparse conic programming"};
    app.require_subcommand(1);

    trisynth::CliOptions cli;
    std::string out_dir;
    double sweep_res = 0.0;
    app.add_option("--out-dir", out_dir, "Override the config's output directory");
    app.add_option("--sweep-res-deg", sweep_res, "Override the sweep resolution (degrees)");
    app.add_flag("--seedless", cli.seedless,
                 "Reserved; the pipeline is deterministic and uses no randomness");
    app.add_flag("--verbose", cli.verbose, "Progress and timing on stderr");

    std::string config_path, weights_path;
    CLI::App* design = app.add_subcommand("design", "Run one design and write its artifacts");
    design->add_option("config", config_path, "Design configuration file")->required();

    CLI::App* compare =
        app.add_subcommand("compare", "Run plain, reweighted and ULA designs on one spec");
    compare->add_option("config", config_path, "Design configuration file")->required();

    CLI::App* sweep =
        app.add_subcommand("sweep-only", "Recompute pattern and metrics from stored weights");
    sweep->add_option("weights", weights_path, "locations.csv from a previous design")
        ->required();
    sweep->add_option("config", config_path, "Design configuration file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (!out_dir.empty()) cli.out_dir = out_dir;
    if (sweep_res != 0.0) cli.sweep_res_deg = sweep_res;

    try {
        if (design->parsed()) return trisynth::cmd_design(config_path, cli);
        if (compare->parsed()) return trisynth::cmd_compare(config_path, cli);
        if (sweep->parsed()) return trisynth::cmd_sweep_only(weights_path, config_path, cli);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
