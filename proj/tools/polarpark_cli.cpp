// Command-line front end: simulate, compare, sweep and verify.

#include "polarpark/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

using namespace polarpark;

int main(int argc, char** argv) {
    CLI::App app{"Polar-coordinate unicycle parking: simulation and CLF certification"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string frame;
    std::string suite = "all";

    const auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) opt->required()->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory");
        cmd->add_option("--seed", seed, "random seed (overrides config)");
    };

    auto* simulate = app.add_subcommand("simulate", "simulate each initial condition, write CSV + summary");
    add_common(simulate, true);
    simulate->add_option("--frame", frame, "integration frame")->check(CLI::IsMember({"polar", "cartesian"}));

    auto* compare = app.add_subcommand("compare", "compare two or more controllers on shared ICs");
    add_common(compare, true);
    compare->add_option("--frame", frame, "integration frame")->check(CLI::IsMember({"polar", "cartesian"}));

    auto* sweep = app.add_subcommand("sweep", "random initial-condition sweep");
    add_common(sweep, true);
    sweep->add_option("--frame", frame, "integration frame")->check(CLI::IsMember({"polar", "cartesian"}));

    auto* verify = app.add_subcommand("verify", "run the certification battery");
    verify->add_option("--suite", suite, "all | lemma1 | clf | prop1 | kl | gradient | decrease");
    verify->add_option("--out", out_dir, "output directory");
    verify->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_code::kOk : exit_code::kUsage;
    }

    try {
        if (verify->parsed()) {
            return cmd_verify(suite, out_dir, seed.value_or(1), std::cout);
        }
        ExperimentConfig cfg = load_experiment_config(config_path);
        if (seed) cfg.seed = *seed;
        if (frame == "polar") cfg.sim.frame = Frame::Polar;
        if (frame == "cartesian") cfg.sim.frame = Frame::Cartesian;
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir, std::cout);
        if (compare->parsed()) return cmd_compare(cfg, out_dir, std::cout);
        if (sweep->parsed()) return cmd_sweep(cfg, out_dir, std::cout);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code::kUsage;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << '\n';
        return exit_code::kRuntime;
    }
    return exit_code::kUsage;
}
