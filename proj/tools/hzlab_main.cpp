#include "hz/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"hzlab: Melnikov functions and exponentially small splitting for Hopf-zero "
                 "unfoldings"};
    app.require_subcommand(1);

    std::string config_path;
    hz::CliOverrides ov;
    app.add_option("--config", config_path, "configuration file (JSON)")->required();
    app.add_option("--out", ov.out_dir, "output directory (overrides the config)");
    app.add_option("--precision", ov.precision, "working precision in bits (overrides)");
    app.add_option("--jobs", ov.jobs, "parallel tasks for the splitting command")
        ->check(CLI::PositiveNumber);
    app.add_flag("--no-cache", ov.no_cache, "disable the result cache");

    auto* check = app.add_subcommand("check-config", "validate the configuration and summarize");
    auto* integrals = app.add_subcommand("integrals", "triangulate the oscillatory integrals");
    auto* melnikov = app.add_subcommand("melnikov", "Melnikov Fourier coefficients per delta");
    auto* splitting = app.add_subcommand("splitting", "measure the manifold splitting");
    auto* report = app.add_subcommand("report", "compare routes, fit the law, emit verdicts");

    CLI11_PARSE(app, argc, argv);

    try {
        hz::RunConfig cfg = hz::load_config(config_path);
        hz::apply_overrides(cfg, ov);
        if (check->parsed()) return hz::cmd_check_config(cfg, std::cout);
        if (integrals->parsed()) return hz::cmd_integrals(cfg, std::cout);
        if (melnikov->parsed()) return hz::cmd_melnikov(cfg, std::cout);
        if (splitting->parsed()) return hz::cmd_splitting(cfg, ov.jobs, std::cout);
        if (report->parsed()) return hz::cmd_report(cfg, std::cout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
