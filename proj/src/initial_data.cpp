#include "neckpinch/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "neckpinch/decomposition.hpp"
#include "neckpinch/derivatives.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/numfmt.hpp"

namespace neck {

void PerturbationSpec::validate() const {
    if (!(b0 > 0.0 && b0 < 1.0)) fail(ErrorKind::InvalidArgument, "b0 must lie in (0, 1)");
    if (!(a0 >= 0.0 && a0 < 1.0)) fail(ErrorKind::InvalidArgument, "a0 must lie in [0, 1)");
    for (double e : {eps0, eps1, eps2, eps3, eps4})
        if (!std::isfinite(e)) fail(ErrorKind::InvalidArgument, "perturbation amplitudes must be finite");
    for (const auto& h : higher) {
        if (h.k < 2) fail(ErrorKind::InvalidArgument, "higher modes need k >= 2");
        if (!std::isfinite(h.amplitude) || !(h.width > 0.0))
            fail(ErrorKind::InvalidArgument, "higher mode needs finite amplitude and positive width");
    }
}

GraphField build_initial(const PerturbationSpec& spec, double y_max, int ny, int nth) {
    spec.validate();
    if (spec.b0 * y_max * y_max < 20.0)
        fail(ErrorKind::InvalidArgument, "grid does not cover the inner region b0 x^2 <= 20");
    const FormalProfile V(spec.a0, spec.b0);
    GraphField u = GraphField::from_function(y_max, ny, nth, [&](double x, double th) {
        const double g = std::exp(-x * x / 4.0);
        double r = profile_value(V, x) + spec.eps0 * x * g + (spec.eps1 * std::cos(th) + spec.eps2 * std::sin(th)) * g +
                   (spec.eps3 * std::cos(th) + spec.eps4 * std::sin(th)) * x * g;
        for (const auto& h : spec.higher) {
            const double t = h.sine ? std::sin(h.k * th) : std::cos(h.k * th);
            r += h.amplitude * t * std::exp(-x * x / (2.0 * h.width * h.width));
        }
        return r;
    });
    for (int i = 0; i < u.ny; ++i)
        for (int j = 0; j < u.nth; ++j)
            if (!(u(i, j) > 0.0))
                fail(ErrorKind::Nonpositive, "initial radius is nonpositive at x=" + fmt_double(u.y(i)) +
                                                 " theta=" + fmt_double(u.theta(j)));
    return u;
}

namespace {

// |f_+| + |f_-| per y row.
std::vector<double> pm_abs(const GraphField& f) {
    const auto [p, m] = fourier_pm(f);
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = std::abs(p[i]) + std::abs(m[i]);
    return out;
}

double mu_norm(const GraphField& f, const WeightedMeasure& w) {
    const std::vector<double> wy = simpson_weights(f.ny, f.dy());
    double s = 0.0;
    for (int i = 0; i < f.ny; ++i) {
        const double mu = mu_weight(w, f.y(i));
        for (int j = 0; j < f.nth; ++j) s += wy[i] * f.dth() * mu * f(i, j) * f(i, j);
    }
    return std::sqrt(s);
}

GraphField derivative(const GraphField& u, int m, int n) {
    const GraphField t = n == 0 ? u : d_theta(u, n);
    return m == 0 ? t : d_y(t, m);
}

// u^{-n} d_x^m d_theta^n u.
GraphField scaled_derivative(const GraphField& u, int m, int n) {
    GraphField d = derivative(u, m, n);
    for (std::size_t k = 0; k < d.size(); ++k) d.values[k] /= std::pow(u.values[k], n);
    return d;
}

}  // namespace

ConditionReport assumption_check(const GraphField& u, const PerturbationSpec& spec, const Constants& c) {
    spec.validate();
    const double b0 = spec.b0;
    const double c0 = constant(c, "c0");
    const double c_star = constant(c, "c_star");
    const WeightedMeasure mu{constant(c, "M")};
    const FormalProfile V(spec.a0, b0);

    const GraphField ux = d_y(u, 1), uxx = d_y(u, 2), uxxx = d_y(u, 3);
    const GraphField ut = d_theta(u, 1);
    const std::vector<double> upm = pm_abs(u), uxpm = pm_abs(ux);

    ConditionReport r;

    double lip = 0, lower = 0, pm_d = 0, pm_sum = 0, theta_decay = 0, pm_decay_u = 0, pm_decay_ux = 0, a2 = 0;
    for (int i = 0; i < u.ny; ++i) {
        const double x = u.y(i);
        const double w11 = std::pow(japanese(x), -1.1), w5 = std::pow(japanese(x), -5.0);
        pm_d = std::max(pm_d, uxpm[i]);
        pm_sum = std::max(pm_sum, upm[i] + uxpm[i]);
        pm_decay_u = std::max(pm_decay_u, w11 * upm[i]);
        pm_decay_ux = std::max(pm_decay_ux, w11 * uxpm[i]);
        const double g = g_step(x, b0);
        const double Vx = profile_value(V, x);
        for (int j = 0; j < u.nth; ++j) {
            const double val = u(i, j);
            lip = std::max(lip, std::hypot(ux(i, j), ut(i, j) / val));
            lower = std::max(lower, c_star * Vx / val);
            theta_decay = std::max(theta_decay, w5 * std::abs(ut(i, j)));
            a2 = std::max(a2, g / val);
        }
    }
    r.add("A1_lipschitz", lip, 2.0 * b0);
    r.add("A1_lower", lower, 1.0);
    r.add("A1_pm_derivative", pm_d, b0 * b0);
    r.add("A1_pm", pm_sum, b0 * b0);
    r.add("A1_theta_decay", theta_decay, std::pow(b0, 2.1));
    r.add("A1_pm_decay", pm_decay_u + pm_decay_ux, std::pow(b0, 53.0 / 20.0));
    r.add("A2", a2, 1.0);

    const GraphField diff = u - GraphField::from_function(u.y_max, u.ny, u.nth,
                                                          [&](double x, double) { return profile_value(V, x); });
    struct MN {
        const char* name;
        double m;
        int n;
    };
    for (const MN& e : {MN{"A3_3,0", 3.0, 0}, MN{"A3_11/10,0", 1.1, 0}, MN{"A3_2,1", 2.0, 1}, MN{"A3_1,1", 1.0, 1}})
        r.add(e.name, weighted_norm(diff, e.m, e.n), std::pow(b0, (e.m + e.n) / 2.0 + 0.1));

    r.add("A4", std::abs(spec.a0 - 0.5), c0);

    {
        std::vector<GraphField> mixed;
        for (int total = 2; total <= 3; ++total)
            for (int n = 1; n <= total; ++n) mixed.push_back(scaled_derivative(u, total - n, n));
        const GraphField uxtt = derivative(u, 1, 2), uttt = d_theta(u, 3);
        double s_mixed = 0, s_axial = 0, s_theta = 0;
        for (std::size_t k = 0; k < u.size(); ++k) {
            double acc = 0.0;
            for (const auto& f : mixed) acc += std::abs(f.values[k]);
            s_mixed = std::max(s_mixed, acc);
            const double val = u.values[k];
            s_axial = std::max(s_axial, b0 / std::sqrt(val) * std::abs(ux.values[k]) +
                                            std::sqrt(b0) * std::abs(uxx.values[k]) + std::abs(uxxx.values[k]));
            s_theta = std::max(s_theta, std::abs(uxtt.values[k]) + std::abs(uttt.values[k]) / val);
        }
        r.add("A5_mixed", s_mixed, b0 * b0);
        r.add("A5_axial", s_axial, std::pow(b0, 1.5));
        r.add("A5_theta", s_theta, c0);
    }

    {
        double s = std::pow(b0, 0.8) * mu_norm(d_y(u, 4), mu) + mu_norm(d_y(u, 5, 2), mu);
        for (int total = 4; total <= 5; ++total)
            for (int n = 1; n <= total; ++n) {
                const int m = total - n;
                s += mu_norm(scaled_derivative(u, m, n), mu);
            }
        r.add("A6", s, std::pow(b0, 4.0));
    }

    {
        double s = 0.0;
        for (int total = 4; total <= 6; ++total)
            for (int n = 0; n <= total; ++n) s = std::max(s, scaled_derivative(u, total - n, n).max_abs());
        r.add("A7", s, constant(c, "A7_bound"));
    }
    return r;
}

}  // namespace neck
