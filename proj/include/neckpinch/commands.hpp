#pragma once

#include <ostream>
#include <string>

#include "neckpinch/config.hpp"
#include "neckpinch/decomposition.hpp"
#include "neckpinch/flow_solver.hpp"

namespace neck {

// Every command writes only below out_dir and returns a process exit status. Module
// failures produce error.json with the error kind and message and a nonzero status.
int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_decompose(const std::string& snapshot, const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_spectrum(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_propagator_test(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_check_assumptions(const RunConfig& cfg, const std::string& out_dir, std::ostream& log);
int cmd_report(const std::string& snapshot, const RunConfig& cfg, const std::string& out_dir, std::ostream& log);

// Output directory precedence: explicit flag, then NECKPINCH_OUT, then the config value.
std::string resolve_output_dir(const std::string& flag, const RunConfig& cfg);

inline constexpr const char* kTrajectoryHeader = "t,tau,lambda,a,b,beta0,beta1,beta2,beta3,beta4,vmin,T_hat";
void write_trajectory_csv(const Trajectory& tr, std::ostream& os);

// Structured record of a decomposition with the frame as quaternion and translation.
std::string decomposition_record(const Decomposition& d, const Frame& frame);

}  // namespace neck
