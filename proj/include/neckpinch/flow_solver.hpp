#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "neckpinch/core_profile.hpp"
#include "neckpinch/decomposition.hpp"
#include "neckpinch/field.hpp"
#include "neckpinch/surface_graph.hpp"

namespace neck {

struct SolverConfig {
    double y_max = 16.0;
    int ny = 321;
    int nth = 32;
    double cfl = 0.5;
    double refit_interval = 0.1;
    // Re-gauge to optimal coordinates every this many refits; 0 keeps lambda and
    // the frame fixed and only updates a.
    int optimal_every = 1;
    double sample_interval = 0.1;
    double lambda_min = 0.0;  // relative to lambda0
    double v_min = 0.0;
    double tau_max = 10.0;
    double v_floor = 19.0 * kSqrt2 / 40.0;
    bool keep_snapshots = false;
    long max_steps = 10000000;

    void validate() const;
};

struct FlowState {
    GraphField v;
    double lambda = 1.0;
    // Rescaling rate; frozen between refits.
    double a = 0.5;
    double t = 0.0;
    double tau = 0.0;
    Frame frame;
    // Far-field reference for the boundary condition d_y(v - V_{a,b}) = 0.
    double bc_a = 0.5;
    double bc_b = 0.0;
};

GraphField rhs_physical(const GraphField& u);
GraphField rhs_rescaled(const GraphField& v, double a);

// Overwrites the two boundary rows so that the one-sided fourth-order derivative of
// v - V_{a,b} vanishes there.
void apply_boundary(GraphField& v, double a, double b);

double stable_dt(const GraphField& v, double cfl);

FlowState step(const FlowState& s, const SolverConfig& cfg, double dt);
FlowState step(const FlowState& s, const SolverConfig& cfg);

// One RK4 step of the physical equation; boundary rows keep d_x u = 0.
GraphField step_physical(const GraphField& u, double dt);

double estimate_T(const FlowState& s);

struct Sample {
    double t = 0.0;
    double tau = 0.0;
    double lambda = 0.0;
    double a_dyn = 0.0;
    ProfileParams params;
    double vmin = 0.0;
    double T_hat = 0.0;
    std::array<double, 4> theta_energy{};  // k = 0..3
    int segment = 0;
};

struct RefitEvent {
    double tau = 0.0;
    double t = 0.0;
    double lambda_before = 0.0;
    double lambda_after = 0.0;
    ProfileParams interior;
    bool optimal = false;
    double b_opt = 0.0;
    RigidMotion motion;
    Frame frame;
    std::array<double, 7> residuals{};
    double theta_energy_k_nonzero = 0.0;
    int segment = 0;
};

struct Snapshot {
    double tau = 0.0;
    double lambda = 0.0;
    double a_dyn = 0.0;
    int segment = 0;
    GraphField v;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<RefitEvent> refits;
    std::vector<Snapshot> snapshots;
    FlowState final_state;
    double lambda0 = 1.0;
    long steps = 0;
    std::string stop_reason;
};

// u0 is sampled on the solver grid in the coordinates of frame0 with lambda0 = 1.
Trajectory run(const GraphField& u0, const Frame& frame0, const SolverConfig& cfg);

}  // namespace neck
