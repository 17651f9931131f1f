// ncmet: run MET experiments from JSON configs, print built-in presets, and
// drive the randomized property suites.
//
//   ncmet run <config.json>
//   ncmet props <suite> --trials N --seed S
//   ncmet preset <name> [-o out.json]
//
// Exit codes: 0 all enabled criteria / invariants pass, 1 a criterion or
// invariant failed, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "ncmet/ncmet.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open " << config_path << "\n";
        return 2;
    }
    ncmet::Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        std::cerr << "error: invalid JSON: " << e.what() << "\n";
        return 2;
    }
    ncmet::ExperimentConfig cfg = ncmet::parse_config(j);
    ncmet::RunReport report = ncmet::run(cfg);

    for (const auto& w : report.horizon_warnings) std::cout << "warning: " << w << "\n";
    for (const auto& cr : report.criteria)
        std::printf("[%s] %-32s value=%.6g bound=%.6g  %s\n", cr.pass ? "PASS" : "FAIL",
                    cr.name.c_str(), cr.value, cr.bound, cr.detail.c_str());
    if (cfg.csv_path.empty()) std::cout << report.csv;
    if (cfg.summary_path.empty()) std::cout << report.summary.dump(2) << "\n";
    std::printf("# wall time: %.2f s\n", report.wall_seconds);
    return report.all_pass ? 0 : 1;
}

int cmd_props(const std::string& suite, int trials, std::uint64_t seed) {
    ncmet::SuiteResult result = ncmet::property_battery(suite, trials, seed);
    std::printf("suite %s: %d trials, seed %llu\n", result.name.c_str(), result.trials,
                static_cast<unsigned long long>(seed));
    for (const auto& inv : result.invariants)
        std::printf("[%s] %-44s worst=%.3g bound=%.3g checks=%ld\n", inv.pass ? "PASS" : "FAIL",
                    inv.name.c_str(), inv.worst, inv.bound, inv.checks);
    return result.pass ? 0 : 1;
}

int cmd_preset(const std::string& name, const std::string& out) {
    const ncmet::Json cfg = ncmet::preset_config(name);
    if (out.empty()) {
        std::cout << cfg.dump(2) << "\n";
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!f) {
            std::cerr << "error: cannot write " << out << "\n";
            return 2;
        }
        f << cfg.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ncmet: numerical experiments with operator-valued cocycles"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run an experiment config");
    run_cmd->add_option("config", config_path, "JSON config file")->required();

    std::string suite;
    int trials = 200;
    std::uint64_t seed = 1;
    auto* props_cmd = app.add_subcommand("props", "run a property suite");
    props_cmd->add_option("suite", suite,
                          "metric | cat0 | spectral_inequalities | determinant | growth")
        ->required();
    props_cmd->add_option("--trials", trials, "number of random trials");
    props_cmd->add_option("--seed", seed, "random seed");

    std::string preset_name, preset_out;
    auto* preset_cmd = app.add_subcommand("preset", "print a built-in experiment config");
    preset_cmd->add_option("name", preset_name,
                           "odometer-counterexample | classical-oseledets-2x2")
        ->required();
    preset_cmd->add_option("-o,--output", preset_out, "write the config to a file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) return cmd_run(config_path);
        if (props_cmd->parsed()) return cmd_props(suite, trials, seed);
        return cmd_preset(preset_name, preset_out);
    } catch (const ncmet::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ncmet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
