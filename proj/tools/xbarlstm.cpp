#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "xbar/config.hpp"
#include "xbar/run.hpp"

namespace {

int cmd_run(const std::string& preset_name, const std::string& config_path,
            std::int64_t seed_override, int epochs_override, const std::string& out_dir,
            bool serial, bool export_dataset) {
    xbar::ExperimentConfig cfg;
    if (!config_path.empty())
        cfg = xbar::ExperimentConfig::load(config_path);
    else
        cfg = xbar::preset(preset_name);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (epochs_override >= 0) cfg.epochs = epochs_override;

    xbar::RunOptions options;
    options.parallel = !serial;
    options.export_dataset = export_dataset;
    xbar::run_experiment(cfg, out_dir, options);
    std::cout << "wrote artifacts to " << out_dir << "\n";
    return 0;
}

int cmd_validate(const std::string& config_path) {
    const xbar::ExperimentConfig cfg = xbar::ExperimentConfig::load(config_path);
    const xbar::ValidationReport report = xbar::validate_config(cfg);
    if (report.ok()) {
        std::cout << "ok: " << config_path << "\n";
        return 0;
    }
    std::cout << report.violations.size() << " violation(s) in " << config_path << ":\n";
    for (const std::string& v : report.violations) std::cout << "  - " << v << "\n";
    return 1;
}

int cmd_export(const std::string& state_path, const std::string& out_dir) {
    const xbar::CrossbarState state = xbar::load_state(state_path);
    xbar::ExperimentConfig cfg = xbar::preset(state.task);
    cfg.seed = state.map.seed;
    cfg.noise = xbar::NoiseModel{};  // exact reload of the stored conductances

    xbar::Crossbar xb(state.map.rows, state.map.cols, cfg.device, cfg.noise, state.map.seed);
    xb.restore_conductances(xb.full(), state.map.values);

    const auto lstm_map = xbar::LayerMapping::lstm(cfg.lstm_partition, cfg.lstm_spec());
    const auto fc_map = xbar::LayerMapping::fc(cfg.fc_partition, cfg.fc_spec());
    xbar::export_maps(xb, {{"lstm", lstm_map}, {"fc", fc_map}}, cfg.weight_codec(), out_dir);
    std::cout << "wrote maps to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1T1R crossbar LSTM trainer/simulator"};
    app.require_subcommand(1);

    std::string preset_name, config_path, out_dir = "out", state_path;
    std::int64_t seed_override = -1;
    int epochs_override = -1;
    bool serial = false, export_dataset = false;

    CLI::App* run = app.add_subcommand("run", "run an experiment and write artifacts");
    CLI::Option* preset_opt =
        run->add_option("--preset", preset_name, "experiment preset (airline, gait-synthetic)");
    CLI::Option* config_opt = run->add_option("--config", config_path, "config file path");
    preset_opt->excludes(config_opt);
    run->add_option("--seed", seed_override, "override the config seed");
    run->add_option("--epochs", epochs_override, "override the config epoch count");
    run->add_option("--out", out_dir, "output directory");
    run->add_flag("--serial", serial, "disable OpenMP parallelism");
    run->add_flag("--export-dataset", export_dataset,
                  "gait: also write the generated sequence files");

    CLI::App* validate = app.add_subcommand("validate", "check a config file");
    validate->add_option("--config", config_path, "config file path")->required();

    CLI::App* exp = app.add_subcommand("export", "re-emit maps from a saved state file");
    exp->add_option("--state", state_path, "state file from a previous run")->required();
    exp->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (preset_name.empty() && config_path.empty())
                throw std::invalid_argument("run: provide --preset or --config");
            return cmd_run(preset_name, config_path, seed_override, epochs_override, out_dir,
                           serial, export_dataset);
        }
        if (validate->parsed()) return cmd_validate(config_path);
        if (exp->parsed()) return cmd_export(state_path, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
