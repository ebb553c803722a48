#include "neckpinch/flow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neckpinch/derivatives.hpp"
#include "neckpinch/diagnostics.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/numfmt.hpp"

namespace neck {

void SolverConfig::validate() const {
    if (nth % 2 != 0 || nth < 4) fail(ErrorKind::Config, "N_theta must be even and >= 4");
    if (!(y_max > 0.0)) fail(ErrorKind::Config, "Y_max must be positive");
    if (ny < 11) fail(ErrorKind::Config, "N_y too small");
    if (!(cfl > 0.0 && cfl <= 1.0)) fail(ErrorKind::Config, "cfl must lie in (0,1]");
    if (!(refit_interval > 0.0)) fail(ErrorKind::Config, "refit_interval must be positive");
    if (!(sample_interval > 0.0)) fail(ErrorKind::Config, "sample_interval must be positive");
    if (!(tau_max >= 0.0)) fail(ErrorKind::Config, "tau_max must be nonnegative");
    if (optimal_every < 0) fail(ErrorKind::Config, "optimal_every must be nonnegative");
}

namespace {

// Shared right side; a = 0 gives the physical equation.
GraphField rhs_common(const GraphField& v, double a) {
    for (double x : v.values)
        if (!(x > 0.0)) fail(ErrorKind::NonPositiveRadius, "radius must stay positive");
    const GraphField vy = d_y(v, 1);
    const GraphField vyy = d_y(v, 2);
    const GraphField vt = d_theta(v, 1);
    const GraphField vtt = d_theta(v, 2);
    const GraphField vyt = d_y(vt, 1);
    GraphField out = v.like();
    for (int i = 0; i < v.ny; ++i) {
        const double y = v.y(i);
        for (int j = 0; j < v.nth; ++j) {
            const double u = v(i, j);
            const double p = vy(i, j);
            const double q = vt(i, j) / u;
            const double D = 1.0 + p * p + q * q;
            // The first-order theta term enters with a minus sign; this is what the
            // graph geometry gives and what keeps the physical and rescaled forms
            // consistent.
            const double A = ((1.0 + q * q) * vyy(i, j) + (1.0 + p * p) / (u * u) * vtt(i, j) -
                              2.0 * p * q / u * vyt(i, j) - q * vt(i, j) / (u * u)) /
                             D;
            out(i, j) = A - a * y * p + a * u - 1.0 / u;
        }
    }
    return out;
}

}  // namespace

GraphField rhs_physical(const GraphField& u) { return rhs_common(u, 0.0); }

GraphField rhs_rescaled(const GraphField& v, double a) { return rhs_common(v, a); }

void apply_boundary(GraphField& v, double a, double b) {
    const int n = v.ny;
    for (int side = 0; side < 2; ++side) {
        const int i0 = side == 0 ? 0 : n - 1;
        const int dir = side == 0 ? 1 : -1;
        const double V0 = profile_raw(a, b, v.y(i0));
        double Vk[4];
        for (int k = 0; k < 4; ++k) Vk[k] = profile_raw(a, b, v.y(i0 + dir * (k + 1)));
        for (int j = 0; j < v.nth; ++j) {
            const double w1 = v(i0 + dir, j) - Vk[0];
            const double w2 = v(i0 + 2 * dir, j) - Vk[1];
            const double w3 = v(i0 + 3 * dir, j) - Vk[2];
            const double w4 = v(i0 + 4 * dir, j) - Vk[3];
            v(i0, j) = V0 + (48.0 * w1 - 36.0 * w2 + 16.0 * w3 - 3.0 * w4) / 25.0;
        }
    }
}

double stable_dt(const GraphField& v, double cfl) {
    const double vmin = v.min();
    const double hy = v.dy(), ht = v.dth();
    return cfl * std::min(hy * hy, vmin * vmin * ht * ht) / 2.0;
}

namespace {

void check_floor(const GraphField& v, double floor, double tau) {
    const double m = v.min();
    if (!(m > floor))
        fail(ErrorKind::StepRejected, "radius " + fmt_double(m) + " fell below the floor " +
                                          fmt_double(floor) + " at tau=" + fmt_double(tau));
}

}  // namespace

FlowState step(const FlowState& s, const SolverConfig& cfg, double dt) {
    auto stage = [&](const GraphField& base, double c, const GraphField& k) {
        GraphField r = base;
        axpy(r, c, k);
        apply_boundary(r, s.bc_a, s.bc_b);
        check_floor(r, cfg.v_floor, s.tau);
        return r;
    };
    const double a = s.a;
    const GraphField k1 = rhs_rescaled(s.v, a);
    const double l1 = -a * s.lambda, t1 = s.lambda * s.lambda;
    const double lam2 = s.lambda + 0.5 * dt * l1;
    const GraphField v2 = stage(s.v, 0.5 * dt, k1);
    const GraphField k2 = rhs_rescaled(v2, a);
    const double l2 = -a * lam2, t2 = lam2 * lam2;
    const double lam3 = s.lambda + 0.5 * dt * l2;
    const GraphField v3 = stage(s.v, 0.5 * dt, k2);
    const GraphField k3 = rhs_rescaled(v3, a);
    const double l3 = -a * lam3, t3 = lam3 * lam3;
    const double lam4 = s.lambda + dt * l3;
    const GraphField v4 = stage(s.v, dt, k3);
    const GraphField k4 = rhs_rescaled(v4, a);
    const double l4 = -a * lam4, t4 = lam4 * lam4;

    FlowState n = s;
    for (std::size_t k = 0; k < n.v.size(); ++k)
        n.v.values[k] += dt / 6.0 * (k1.values[k] + 2.0 * k2.values[k] + 2.0 * k3.values[k] + k4.values[k]);
    apply_boundary(n.v, s.bc_a, s.bc_b);
    check_floor(n.v, cfg.v_floor, s.tau);
    n.lambda += dt / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    n.t += dt / 6.0 * (t1 + 2.0 * t2 + 2.0 * t3 + t4);
    n.tau += dt;
    return n;
}

FlowState step(const FlowState& s, const SolverConfig& cfg) {
    return step(s, cfg, stable_dt(s.v, cfg.cfl));
}

GraphField step_physical(const GraphField& u, double dt) {
    auto stage = [&](double c, const GraphField& k) {
        GraphField r = u;
        axpy(r, c, k);
        apply_boundary(r, 0.5, 0.0);
        return r;
    };
    const GraphField k1 = rhs_physical(u);
    const GraphField k2 = rhs_physical(stage(0.5 * dt, k1));
    const GraphField k3 = rhs_physical(stage(0.5 * dt, k2));
    const GraphField k4 = rhs_physical(stage(dt, k3));
    GraphField n = u;
    for (std::size_t k = 0; k < n.size(); ++k)
        n.values[k] += dt / 6.0 * (k1.values[k] + 2.0 * k2.values[k] + 2.0 * k3.values[k] + k4.values[k]);
    apply_boundary(n, 0.5, 0.0);
    return n;
}

double estimate_T(const FlowState& s) {
    if (!(s.a > 0.0)) fail(ErrorKind::InvalidArgument, "estimate_T needs a > 0");
    return s.t + s.lambda * s.lambda / (2.0 * s.a);
}

namespace {

class Runner {
public:
    Runner(const SolverConfig& cfg, Trajectory& out) : cfg_(cfg), out_(out) {}

    void refit(FlowState& s, bool optimal) {
        RefitEvent ev;
        ev.tau = s.tau;
        ev.t = s.t;
        ev.lambda_before = s.lambda;
        const Decomposition d = fit_parameters(s.v, params_);
        params_ = d.params;
        ev.interior = d.params;
        ev.residuals = d.ortho_residuals;
        if (optimal) {
            OptimalOptions oo;
            const OptimalResult r = optimal_refit(s.v, s.frame, s.lambda, oo);
            s.v = r.v;
            s.lambda = r.lambda_opt;
            s.frame = r.frame;
            s.a = 0.5 - 0.25 * r.b_opt;
            s.bc_a = s.a;
            s.bc_b = r.b_opt;
            params_ = r.dec.params;
            ev.optimal = true;
            ev.b_opt = r.b_opt;
            ev.motion = r.motion;
            ev.residuals = r.dec.ortho_residuals;
            ++segment_;
        } else {
            s.a = d.params.a;
            s.bc_a = d.params.a;
            s.bc_b = std::max(0.0, d.params.b);
        }
        ev.lambda_after = s.lambda;
        ev.frame = s.frame;
        ev.segment = segment_;
        const auto e = theta_energy(s.v);
        ev.theta_energy_k_nonzero = e[1] + e[2] + e[3];
        out_.refits.push_back(ev);
    }

    void sample(const FlowState& s) {
        Sample smp;
        smp.t = s.t;
        smp.tau = s.tau;
        smp.lambda = s.lambda;
        smp.a_dyn = s.a;
        const Decomposition d = fit_parameters(s.v, params_);
        smp.params = d.params;
        smp.vmin = s.v.min();
        smp.T_hat = estimate_T(s);
        smp.theta_energy = theta_energy(s.v);
        smp.segment = segment_;
        out_.samples.push_back(smp);
        if (cfg_.keep_snapshots) out_.snapshots.push_back({s.tau, s.lambda, s.a, segment_, s.v});
    }

    void set_params(const ProfileParams& p) { params_ = p; }

private:
    const SolverConfig& cfg_;
    Trajectory& out_;
    ProfileParams params_;
    int segment_ = 0;
};

}  // namespace

Trajectory run(const GraphField& u0, const Frame& frame0, const SolverConfig& cfg) {
    cfg.validate();
    Trajectory tr;
    FlowState s;
    s.v = u0;
    s.frame = frame0;
    s.lambda = 1.0;
    tr.lambda0 = 1.0;
    Runner runner(cfg, tr);

    const Decomposition d0 = fit_parameters(s.v, 0.5);
    runner.set_params(d0.params);
    s.a = d0.params.a;
    s.bc_a = d0.params.a;
    s.bc_b = std::max(0.0, d0.params.b);
    long refit_count = 0;
    try {
        if (cfg.optimal_every > 0) runner.refit(s, true);
        runner.sample(s);

        long k_refit = 1, k_sample = 1;
        while (true) {
            if (s.tau >= cfg.tau_max) {
                tr.stop_reason = "tau_max";
                break;
            }
            if (cfg.lambda_min > 0.0 && s.lambda <= cfg.lambda_min * tr.lambda0) {
                tr.stop_reason = "lambda_min";
                break;
            }
            if (cfg.v_min > 0.0 && s.v.min() <= cfg.v_min) {
                tr.stop_reason = "v_min";
                break;
            }
            if (tr.steps >= cfg.max_steps) {
                tr.stop_reason = "max_steps";
                break;
            }
            const double t_refit = k_refit * cfg.refit_interval;
            const double t_sample = k_sample * cfg.sample_interval;
            const double t_event = std::min({t_refit, t_sample, cfg.tau_max});
            double dt = stable_dt(s.v, cfg.cfl);
            bool lands = false;
            if (s.tau + dt >= t_event - 1e-12) {
                dt = t_event - s.tau;
                lands = true;
            }
            s = step(s, cfg, dt);
            ++tr.steps;
            if (lands) s.tau = t_event;
            // Event grids k * interval can round past tau_max or past each other.
            const auto at = [&](double t) { return lands && std::abs(t - t_event) <= 1e-9 * std::max(1.0, t_event); };
            if (at(t_refit)) {
                ++refit_count;
                const bool opt = cfg.optimal_every > 0 && refit_count % cfg.optimal_every == 0;
                runner.refit(s, opt);
                ++k_refit;
            }
            if (at(t_sample)) {
                runner.sample(s);
                ++k_sample;
            }
        }
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(e.what()) + " (tau=" + fmt_double(s.tau) + ")");
    }
    tr.final_state = s;
    return tr;
}

}  // namespace neck
