#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <vector>

#include "neckpinch/derivatives.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/flow_solver.hpp"
#include "neckpinch/initial_data.hpp"

using namespace neck;

namespace {

double max_abs_interior(const GraphField& f, double y_lim = 1e300) {
    double m = 0.0;
    for (int i = 1; i + 1 < f.ny; ++i) {
        if (std::abs(f.y(i)) > y_lim) continue;
        for (int j = 0; j < f.nth; ++j) m = std::max(m, std::abs(f(i, j)));
    }
    return m;
}

// Manufactured solution u = 1.5 + 0.2 cos(x) sin(t + 1) + 0.1 e^{-x^2/8} cos(theta); returns
// the residual d_t u - rhs_physical(u) on a grid with ny points over [-8, 8].
double manufactured_residual(int ny) {
    const double t = 0.3;
    const GraphField u = GraphField::from_function(8.0, ny, 16, [&](double x, double th) {
        return 1.5 + 0.2 * std::cos(x) * std::sin(t + 1.0) + 0.1 * std::exp(-x * x / 8.0) * std::cos(th);
    });
    // Exact right side evaluated from closed-form derivatives.
    GraphField exact = u.like();
    for (int i = 0; i < u.ny; ++i) {
        const double x = u.y(i);
        const double g = std::exp(-x * x / 8.0);
        for (int j = 0; j < u.nth; ++j) {
            const double th = u.theta(j);
            const double U = u(i, j);
            const double ux = -0.2 * std::sin(x) * std::sin(t + 1.0) - 0.025 * x * g * std::cos(th);
            const double uxx = -0.2 * std::cos(x) * std::sin(t + 1.0) + 0.1 * g * (x * x / 16.0 - 0.25) * std::cos(th);
            const double ut = -0.1 * g * std::sin(th);
            const double utt = -0.1 * g * std::cos(th);
            const double uxt = 0.025 * x * g * std::sin(th);
            const double p = ux, q = ut / U;
            const double D = 1.0 + p * p + q * q;
            exact(i, j) = ((1.0 + q * q) * uxx + (1.0 + p * p) * utt / (U * U) - 2.0 * p * q * uxt / U -
                           q * ut / (U * U)) / D - 1.0 / U;
        }
    }
    return max_abs_interior(rhs_physical(u) - exact, 6.0);
}

}  // namespace

TEST_CASE("rhs_physical on the round cylinder") {
    const GraphField u(16.0, 81, 8, 2.5);
    const GraphField r = rhs_physical(u);
    for (double x : r.values) CHECK(x == doctest::Approx(-0.4).epsilon(1e-15));
    GraphField bad = u;
    bad(10, 3) = 0.0;
    try {
        rhs_physical(bad);
        FAIL("expected NonPositiveRadius");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonPositiveRadius);
    }
}

TEST_CASE("rhs_physical matches the shrinking tilted cylinder") {
    const double R = 2.0, eps = 0.02, h = 1e-5;
    const GraphField u = GraphField::from_function(16.0, 321, 32, [&](double x, double th) {
        return tilted_cylinder_graph(R, eps, x, th);
    });
    GraphField dudt = u.like();
    for (int i = 0; i < u.ny; ++i)
        for (int j = 0; j < u.nth; ++j) {
            const double x = u.y(i), th = u.theta(j);
            dudt(i, j) = (tilted_cylinder_graph(std::sqrt(R * R - 2.0 * h), eps, x, th) -
                          tilted_cylinder_graph(std::sqrt(R * R + 2.0 * h), eps, x, th)) / (2.0 * h);
        }
    CHECK(max_abs_interior(rhs_physical(u) - dudt) < 1e-7);
}

TEST_CASE("rhs_physical manufactured solution converges at the stencil order") {
    const double e1 = manufactured_residual(81), e2 = manufactured_residual(161), e3 = manufactured_residual(321);
    const double s1 = std::log2(e1 / e2), s2 = std::log2(e2 / e3);
    CHECK(e3 < 1e-6);
    // fourth-order y stencils; theta is spectral so it does not limit the slope
    CHECK(s1 > 3.7);
    CHECK(s2 > 3.7);
}

TEST_CASE("rhs_rescaled examples") {
    const GraphField fixed(16.0, 161, 16, kSqrt2);
    // every stencil of a constant vanishes; what remains is the rounding of a sqrt2 - 1/sqrt2
    CHECK(rhs_rescaled(fixed, 0.5).max_abs() <= 2.0 * std::numeric_limits<double>::epsilon());

    const GraphField c(16.0, 161, 16, 1.3);
    for (double x : rhs_rescaled(c, 0.45).values) CHECK(x == doctest::Approx(0.45 * 1.3 - 1.0 / 1.3).epsilon(1e-15));

    // On V_{1/2,s} the adiabatic part cancels and only V''/(1 + V'^2) remains.
    const double s = 0.1;
    const GraphField V = GraphField::from_function(16.0, 321, 16, [&](double y, double) {
        return std::sqrt(2.0 + s * y * y);
    });
    GraphField oracle = V.like();
    for (int i = 0; i < V.ny; ++i) {
        const double y = V.y(i), w = std::sqrt(2.0 + s * y * y);
        const double v1 = s * y / w, v2 = 2.0 * s / (w * w * w);
        for (int j = 0; j < V.nth; ++j) oracle(i, j) = v2 / (1.0 + v1 * v1);
    }
    CHECK(max_abs_interior(rhs_rescaled(V, 0.5) - oracle) < 1e-6);
}

TEST_CASE("step keeps the cylinder fixed point and integrates the clocks") {
    SolverConfig cfg;
    cfg.ny = 81;
    cfg.nth = 8;
    FlowState s;
    s.v = GraphField(16.0, 81, 8, kSqrt2);
    s.lambda = 1.0;
    s.a = 0.5;
    const double dt = 0.01;
    for (int k = 0; k < 200; ++k) s = step(s, cfg, dt);
    CHECK((s.v - GraphField(16.0, 81, 8, kSqrt2)).max_abs() == 0.0);
    CHECK(s.tau == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(s.lambda / std::exp(-1.0) == doctest::Approx(1.0).epsilon(1e-10));
    // t = int lambda^2 dtau = 1 - e^{-tau}
    CHECK(s.t == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-10));
    CHECK(estimate_T(s) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("physical step converges at fourth order on the round cylinder") {
    auto err = [](int n) {
        GraphField u(16.0, 41, 8, 2.0);
        const double dt = 1.5 / n;
        for (int k = 0; k < n; ++k) u = step_physical(u, dt);
        return std::abs(u(20, 0) - 1.0);
    };
    const double e1 = err(20), e2 = err(40);
    CHECK(e2 < 1e-6);
    CHECK(std::log2(e1 / e2) > 3.8);
}

TEST_CASE("physical and rescaled steps commute at the neck to second order in dt") {
    auto gap = [](double dt) {
        const GraphField u0 = GraphField::from_function(16.0, 161, 16, [](double x, double th) {
            return kSqrt2 + 0.05 * std::exp(-x * x / 8.0) + 0.01 * std::exp(-x * x / 8.0) * std::cos(2.0 * th);
        });
        SolverConfig cfg;
        cfg.ny = 161;
        cfg.nth = 16;
        FlowState s;
        s.v = u0;
        s.lambda = 1.0;
        s.a = 0.5;
        s.bc_a = 0.5;
        const FlowState n = step(s, cfg, dt);
        const GraphField up = step_physical(u0, n.t);
        const int mid = (u0.ny - 1) / 2;
        double g = 0.0;
        for (int j = 0; j < u0.nth; ++j) g = std::max(g, std::abs(up(mid, j) - n.lambda * n.v(mid, j)));
        return g;
    };
    const double g1 = gap(2e-3), g2 = gap(1e-3);
    CHECK(g1 < 1e-6);
    CHECK(g1 / g2 > 3.0);
}

TEST_CASE("step rejects radii below the floor") {
    SolverConfig cfg;
    cfg.ny = 41;
    cfg.nth = 8;
    FlowState s;
    s.v = GraphField(16.0, 41, 8, 0.68);
    try {
        step(s, cfg, 0.1);
        FAIL("expected StepRejected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::StepRejected);
    }
}

TEST_CASE("estimate_T examples") {
    FlowState s;
    // self-similar state lambda = sqrt(T - t)
    s.t = 0.7;
    s.lambda = std::sqrt(2.0 - 0.7);
    s.a = 0.5;
    CHECK(estimate_T(s) == doctest::Approx(2.0).epsilon(1e-15));
    // cylinder of radius 2 normalized to v = sqrt2: lambda = 2/sqrt2; exact T = R^2/2
    s.t = 0.0;
    s.lambda = 2.0 / kSqrt2;
    CHECK(estimate_T(s) == doctest::Approx(2.0).epsilon(1e-15));
    s.a = 0.0;
    CHECK_THROWS_AS(estimate_T(s), Error);
}

TEST_CASE("solver configuration validation") {
    SolverConfig c;
    CHECK_NOTHROW(c.validate());
    c.nth = 31;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SolverConfig{};
    c.cfl = 1.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = SolverConfig{};
    c.y_max = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("stable_dt follows the parabolic restriction") {
    const GraphField v(16.0, 321, 32, kSqrt2);
    const double dy = v.dy(), dth = v.dth();
    const double expect = 0.5 * std::min(dy * dy, 2.0 * dth * dth) / 2.0;
    CHECK(stable_dt(v, 0.5) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("run on the fixed point") {
    SolverConfig cfg;
    cfg.ny = 81;
    cfg.nth = 8;
    cfg.tau_max = 2.0;
    cfg.optimal_every = 0;
    const Trajectory tr = run(GraphField(16.0, 81, 8, kSqrt2), Frame{}, cfg);
    CHECK(tr.stop_reason == "tau_max");
    CHECK(tr.samples.size() == 21);
    for (const Sample& s : tr.samples) {
        CHECK(std::abs(s.params.a - 0.5) < 1e-12);
        CHECK(std::abs(s.params.b) < 1e-12);
        CHECK(s.lambda / std::exp(-0.5 * s.tau) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(s.T_hat == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(std::abs(s.vmin - kSqrt2) < 1e-12);
    }
}

TEST_CASE("short neckpinch run: clocks, positivity and stop criteria") {
    SolverConfig cfg;
    cfg.tau_max = 1.0;
    PerturbationSpec p;
    const GraphField u0 = build_initial(p, cfg.y_max, cfg.ny, cfg.nth);
    const Trajectory tr = run(u0, Frame{}, cfg);
    CHECK(tr.stop_reason == "tau_max");
    REQUIRE(tr.samples.size() == 11);
    for (std::size_t k = 0; k < tr.samples.size(); ++k) {
        const Sample& s = tr.samples[k];
        CHECK(s.vmin >= cfg.v_floor);
        CHECK(s.params.a > 0.25);
        CHECK(s.params.a < 0.75);
        if (k > 0) {
            const Sample& r = tr.samples[k - 1];
            // T-hat drifts only by integrator and refit noise
            CHECK(s.T_hat <= r.T_hat + 1e-3);
            CHECK(s.t > r.t);
        }
    }
    CHECK(tr.refits.size() >= 10);

    SolverConfig stop = cfg;
    stop.tau_max = 50.0;
    stop.lambda_min = 0.8;
    stop.ny = 161;
    stop.nth = 8;
    const GraphField coarse = build_initial(p, stop.y_max, stop.ny, stop.nth);
    const Trajectory tl = run(coarse, Frame{}, stop);
    CHECK(tl.stop_reason == "lambda_min");
    CHECK(tl.final_state.lambda <= 0.8);

    stop.lambda_min = 0.0;
    stop.v_min = 1.5;
    const Trajectory tv = run(coarse, Frame{}, stop);
    CHECK(tv.stop_reason == "v_min");
    CHECK(tv.steps == 0);
}

TEST_CASE("zero-length run reports only the initial state") {
    SolverConfig cfg;
    cfg.ny = 81;
    cfg.nth = 8;
    cfg.tau_max = 0.0;
    const Trajectory tr = run(GraphField(16.0, 81, 8, kSqrt2), Frame{}, cfg);
    CHECK(tr.samples.size() == 1);
    CHECK(tr.steps == 0);
}

TEST_CASE("final event is kept when the sample grid rounds past tau_max") {
    SolverConfig cfg;
    cfg.ny = 81;
    cfg.nth = 8;
    cfg.tau_max = 0.3;  // 3 * 0.1 rounds to 0.30000000000000004
    const Trajectory tr = run(GraphField(16.0, 81, 8, kSqrt2), Frame{}, cfg);
    REQUIRE(tr.samples.size() == 4);
    CHECK(tr.samples.back().tau == 0.3);
    CHECK(tr.refits.back().tau == 0.3);
}
