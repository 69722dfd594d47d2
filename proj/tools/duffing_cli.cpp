// duffing_cli.cpp — command-line entry point for the simulation scenarios.

#include "duffing/config.hpp"
#include "duffing/errors.hpp"
#include "duffing/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Driven Duffing oscillator: quantum dissipative dynamics"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(DUFFING_VERSION));

    std::string config_path;
    std::string out_dir;
    std::string preset;
    int workers = 0;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "JSON experiment file (comments allowed)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "worker threads for independent parameter points")
        ->check(CLI::PositiveNumber);
    app.add_option("--preset", preset, "parameter preset")->check(CLI::IsMember({"paper-mesoscopic"}));
    app.add_option("--set", overrides, "override a config key, e.g. oscillator.delta=0.05");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"transient", "single trajectory: position, populations, purity"},
        {"sweep", "steady amplitude against drive, quantum and classical"},
        {"wigner", "rotating-frame Wigner snapshots and state diagnostics"},
        {"rates", "escape-rate campaigns and the scaling fit"},
        {"bifurcation", "critical drive, fixed points, detuning window"},
        {"classical", "classical up/down hysteresis sweep"}};
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string scenario = app.get_subcommands().front()->get_name();

    duffing::Experiment exp;
    try {
        nlohmann::json doc = nlohmann::json::object();
        if (!preset.empty()) doc = duffing::preset_json(preset);
        if (!config_path.empty()) duffing::merge_into(doc, duffing::load_config_file(config_path));
        doc["scenario"] = scenario;
        for (const auto& o : overrides) duffing::apply_override(doc, o);
        if (!out_dir.empty()) doc["output"]["dir"] = out_dir;
        if (workers > 0) doc["output"]["workers"] = workers;
        exp = duffing::make_experiment(std::move(doc));
    } catch (const duffing::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    const duffing::RunManifest m = duffing::run_scenario(exp);
    if (m.exit_code != 0) {
        std::cerr << (m.exit_code == 2 ? "config error: " : "numerical failure: ") << m.error << "\n";
        return m.exit_code;
    }
    if (exp.config.scenario == duffing::Scenario::Bifurcation) {
        std::vector<double> ratios = exp.config.bifurcation.f0_over_fc;
        if (ratios.empty()) ratios = {0.0, 0.5, 0.8, 0.9, 0.95, 1.0, 1.1};
        std::cout << duffing::bifurcation_report(exp.config.resolved_params(), ratios);
    }
    std::cout << "summary: " << m.summary.dump() << "\n";
    for (const auto& f : m.files) std::cout << "wrote " << (exp.config.out_dir / f).string() << "\n";
    std::cout << "manifest " << (exp.config.out_dir / duffing::kManifestName).string() << "\n";
    return 0;
}
