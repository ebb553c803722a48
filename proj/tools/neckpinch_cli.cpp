#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "neckpinch/commands.hpp"
#include "neckpinch/config.hpp"
#include "neckpinch/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Mean curvature flow neckpinch experiments"};
    app.require_subcommand(1);

    std::string config_path, output_dir, snapshot;
    std::uint64_t seed = 0;
    bool seed_given = false;
    app.add_option("--config", config_path, "Run configuration file")->check(CLI::ExistingFile);
    app.add_option("--output-dir", output_dir, "Directory for all outputs");
    app.add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { seed = s; seed_given = true; }, "Random seed");
    app.add_option("--snapshot", snapshot, "Stored graph record (decompose, report)");

    auto* simulate = app.add_subcommand("simulate", "Run the rescaled flow and write trajectory artifacts");
    auto* decompose = app.add_subcommand("decompose", "Fit profile parameters to a stored graph");
    auto* spectrum = app.add_subcommand("spectrum", "Print the linearized spectrum table");
    auto* propagator = app.add_subcommand("propagator-test", "Run the propagator decay experiment");
    auto* assumptions = app.add_subcommand("check-assumptions", "Evaluate initial-data assumption margins");
    auto* report = app.add_subcommand("report", "Diagnostics report for a stored graph");
    for (auto* sc : {simulate, decompose, spectrum, propagator, assumptions, report}) sc->fallthrough();

    CLI11_PARSE(app, argc, argv);

    neck::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = neck::load_config(config_path);
    } catch (const neck::Error& e) {
        std::cerr << "error [" << neck::error_kind_name(e.kind()) << "]: " << e.what() << '\n';
        return 2;
    }
    if (seed_given) cfg.seed = seed;
    const std::string out = neck::resolve_output_dir(output_dir, cfg);

    if (simulate->parsed()) return neck::cmd_simulate(cfg, out, std::cout);
    if (decompose->parsed()) return neck::cmd_decompose(snapshot, cfg, out, std::cout);
    if (spectrum->parsed()) return neck::cmd_spectrum(cfg, out, std::cout);
    if (propagator->parsed()) return neck::cmd_propagator_test(cfg, out, std::cout);
    if (assumptions->parsed()) return neck::cmd_check_assumptions(cfg, out, std::cout);
    if (report->parsed()) return neck::cmd_report(snapshot, cfg, out, std::cout);
    return 1;
}
