#pragma once

#include <cstdint>
#include <string>

#include "neckpinch/flow_solver.hpp"
#include "neckpinch/initial_data.hpp"

namespace neck {

struct PropagatorConfig {
    double alpha = 0.5;
    int n_h = 64;
    int trials = 64;

    bool operator==(const PropagatorConfig&) const = default;
};

struct RunConfig {
    SolverConfig solver;
    PerturbationSpec perturbation;
    PropagatorConfig propagator;
    // Condition margins are evaluated at every this many samples.
    int diagnostic_every = 10;
    std::string output_dir = "out";
    std::string constants_file;  // empty: built-in defaults
    std::uint64_t seed = 20240601;
    double spectrum_a = 0.5;
};

bool operator==(const SolverConfig& a, const SolverConfig& b);
bool operator==(const PerturbationSpec& a, const PerturbationSpec& b);
bool operator==(const RunConfig& a, const RunConfig& b);

// "key = value" lines grouped under [solver], [perturbation], [propagator],
// [diagnostics] and [run]; '#' starts a comment. Unknown keys are errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& c);

}  // namespace neck
