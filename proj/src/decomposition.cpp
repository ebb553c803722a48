#include "neckpinch/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "neckpinch/derivatives.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/numfmt.hpp"

namespace neck {

double profile_raw(double a, double b, double y) {
    return std::sqrt((2.0 + b * y * y) / (2.0 - 2.0 * a));
}

double beta_terms(const std::array<double, 5>& beta, double y, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return beta[0] * y + beta[1] * c + beta[2] * s + beta[3] * y * c + beta[4] * y * s;
}

GraphField model_field(const GraphField& like, const ProfileParams& p) {
    GraphField f = like.like();
    for (int i = 0; i < f.ny; ++i) {
        const double y = f.y(i);
        const double V = profile_raw(p.a, p.b, y);
        for (int j = 0; j < f.nth; ++j) f(i, j) = V + beta_terms(p.beta, y, f.theta(j));
    }
    return f;
}

namespace {

double mode_value(int k, double a, double y, double c, double s) {
    switch (k) {
        case 0: return 1.0;
        case 1: return y;
        case 2: return y * y - 1.0 / a;
        case 3: return c;
        case 4: return s;
        case 5: return y * c;
        default: return y * s;
    }
}

// Plain-L^2 family used for the gauge-level check: y^2 in place of y^2 - 1/a.
double plain_mode_value(int k, double y, double c, double s) {
    return k == 2 ? y * y : mode_value(k, 1.0, y, c, s);
}

struct Trig {
    std::vector<double> c, s;
    explicit Trig(const GraphField& g) : c(g.nth), s(g.nth) {
        for (int j = 0; j < g.nth; ++j) {
            c[j] = std::cos(g.theta(j));
            s[j] = std::sin(g.theta(j));
        }
    }
};

std::vector<double> row_weights(const GraphField& g, double a) {
    std::vector<double> w = simpson_weights(g.ny, g.dy());
    for (int i = 0; i < g.ny; ++i) w[i] *= g.dth() * std::exp(-0.5 * a * g.y(i) * g.y(i));
    return w;
}

// Projection coefficients of (v - model) for the interior decomposition.
std::array<double, 7> interior_residual(const GraphField& v, const ProfileParams& p,
                                        const Trig& tr) {
    const std::vector<double> w = row_weights(v, p.a);
    std::array<double, 7> num{}, den{};
    for (int i = 0; i < v.ny; ++i) {
        const double y = v.y(i);
        const double V = profile_raw(p.a, p.b, y);
        for (int j = 0; j < v.nth; ++j) {
            const double c = tr.c[j], s = tr.s[j];
            const double phi = v(i, j) - V -
                               (p.beta[0] * y + p.beta[1] * c + p.beta[2] * s + p.beta[3] * y * c +
                                p.beta[4] * y * s);
            for (int k = 0; k < 7; ++k) {
                const double e = mode_value(k, p.a, y, c, s);
                num[k] += w[i] * phi * e;
                den[k] += w[i] * e * e;
            }
        }
    }
    std::array<double, 7> r{};
    for (int k = 0; k < 7; ++k) r[k] = num[k] / den[k];
    return r;
}

ProfileParams from_vector(const Eigen::Matrix<double, 7, 1>& x) {
    ProfileParams p;
    p.a = x[0];
    p.b = x[1];
    for (int k = 0; k < 5; ++k) p.beta[k] = x[2 + k];
    return p;
}

Eigen::Matrix<double, 7, 1> to_vector(const ProfileParams& p) {
    Eigen::Matrix<double, 7, 1> x;
    x << p.a, p.b, p.beta[0], p.beta[1], p.beta[2], p.beta[3], p.beta[4];
    return x;
}

double max_abs(const std::array<double, 7>& r) {
    double m = 0.0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m;
}

bool admissible(const ProfileParams& p, double y_max) {
    return p.a > 0.0 && p.a < 1.0 && 2.0 + p.b * y_max * y_max > 0.0;
}

double theta_mean_at(const GraphField& v, double y) {
    double s = 0.0;
    for (int j = 0; j < v.nth; ++j) s += interpolate(v, y, v.theta(j));
    return s / v.nth;
}

ProfileParams heuristic_guess(const GraphField& v, double a_prev) {
    ProfileParams p;
    const double v0 = theta_mean_at(v, 0.0);
    p.a = std::clamp(1.0 - 1.0 / (v0 * v0), 0.05, 0.95);
    if (std::abs(p.a - a_prev) < 0.2) p.a = a_prev;
    const double y1 = std::min(2.0, 0.5 * v.y_max);
    const double v1 = theta_mean_at(v, y1);
    p.b = std::clamp((v1 * v1 * (2.0 - 2.0 * p.a) - 2.0) / (y1 * y1), 0.0, 1.0);
    return p;
}

}  // namespace

ModeBasis ModeBasis::build(const GraphField& like, double a) {
    ModeBasis mb;
    mb.a = a;
    for (int k = 0; k < 7; ++k) {
        mb.modes[k] = like.like();
        for (int i = 0; i < like.ny; ++i)
            for (int j = 0; j < like.nth; ++j)
                mb.modes[k](i, j) =
                    mode_value(k, a, like.y(i), std::cos(like.theta(j)), std::sin(like.theta(j)));
        mb.norms2[k] = weighted_inner(mb.modes[k], mb.modes[k], a);
    }
    return mb;
}

std::vector<double> gaussian_weights(const GraphField& like, double a) { return row_weights(like, a); }

double weighted_inner(const GraphField& f, const GraphField& g, double a) {
    if (!f.same_grid(g)) fail(ErrorKind::InvalidArgument, "weighted_inner: grids differ");
    const std::vector<double> w = row_weights(f, a);
    double acc = 0.0;
    for (int i = 0; i < f.ny; ++i) {
        double row = 0.0;
        for (int j = 0; j < f.nth; ++j) row += f(i, j) * g(i, j);
        acc += w[i] * row;
    }
    return acc;
}

double plain_inner(const GraphField& f, const GraphField& g) { return weighted_inner(f, g, 0.0); }

GaugeFields gauge_fields(const GraphField& v, const ProfileParams& p) {
    GaugeFields gf;
    gf.w = v.like();
    gf.xi = v.like();
    const Trig tr(v);
    for (int i = 0; i < v.ny; ++i) {
        const double y = v.y(i);
        const double G = std::exp(-0.25 * p.a * y * y);
        const double V = profile_raw(p.a, p.b, y);
        for (int j = 0; j < v.nth; ++j) {
            gf.w(i, j) = v(i, j) * G;
            gf.xi(i, j) = G * (v(i, j) - V - beta_terms(p.beta, y, v.theta(j)));
        }
    }
    // <e^{-a y^2/4} xi, m> / <e^{-a y^2/2} m, m>, plain L^2.
    const std::vector<double> w = row_weights(v, 0.0);
    std::array<double, 7> num{}, den{};
    for (int i = 0; i < v.ny; ++i) {
        const double y = v.y(i);
        const double G = std::exp(-0.25 * p.a * y * y);
        for (int j = 0; j < v.nth; ++j) {
            for (int k = 0; k < 7; ++k) {
                const double m = plain_mode_value(k, y, tr.c[j], tr.s[j]);
                num[k] += w[i] * G * gf.xi(i, j) * m;
                den[k] += w[i] * G * G * m * m;
            }
        }
    }
    for (int k = 0; k < 7; ++k) gf.ortho[k] = num[k] / den[k];
    return gf;
}

namespace {

Decomposition assemble(const GraphField& v, const ProfileParams& p, const Trig& tr) {
    Decomposition d;
    d.params = p;
    d.phi = v - model_field(v, p);
    d.ortho_residuals = interior_residual(v, p, tr);
    GaugeFields gf = gauge_fields(v, p);
    d.w = std::move(gf.w);
    d.xi = std::move(gf.xi);
    d.xi_residuals = gf.ortho;
    return d;
}

}  // namespace

Decomposition fit_parameters(const GraphField& v, const ProfileParams& guess, const FitOptions& opt) {
    const Trig tr(v);
    Eigen::Matrix<double, 7, 1> x = to_vector(guess);
    auto R = [&](const Eigen::Matrix<double, 7, 1>& xx) {
        const ProfileParams p = from_vector(xx);
        if (!admissible(p, v.y_max))
            fail(ErrorKind::NoConvergence, "decomposition iterate left the admissible set");
        return interior_residual(v, p, tr);
    };
    auto as_vec = [](const std::array<double, 7>& r) {
        Eigen::Matrix<double, 7, 1> e;
        for (int k = 0; k < 7; ++k) e[k] = r[k];
        return e;
    };
    std::array<double, 7> r = R(x);
    double cond = 0.0;
    int it = 0;
    bool converged = max_abs(r) <= opt.tolerance;
    while (!converged) {
        if (it >= opt.max_iterations)
            fail(ErrorKind::NoConvergence, "decomposition Newton exceeded " +
                                               std::to_string(opt.max_iterations) + " iterations");
        ++it;
        Eigen::Matrix<double, 7, 7> J;
        for (int k = 0; k < 7; ++k) {
            Eigen::Matrix<double, 7, 1> xh = x;
            const double h = opt.fd_step * std::max(1.0, std::abs(x[k]));
            xh[k] += h;
            J.col(k) = (as_vec(R(xh)) - as_vec(r)) / h;
        }
        Eigen::JacobiSVD<Eigen::Matrix<double, 7, 7>> svd(J);
        const auto sv = svd.singularValues();
        cond = sv[6] > 0.0 ? sv[0] / sv[6] : std::numeric_limits<double>::infinity();
        Eigen::Matrix<double, 7, 1> dx = -J.fullPivLu().solve(as_vec(r));
        if (!dx.allFinite() || dx.cwiseAbs().maxCoeff() > opt.basin)
            fail(ErrorKind::NoConvergence, "decomposition Newton step left the basin");
        const double r0 = max_abs(r);
        std::array<double, 7> rn{};
        Eigen::Matrix<double, 7, 1> xn = x;
        bool accepted = false;
        for (int damp = 0; damp < 12; ++damp) {
            xn = x + dx;
            try {
                rn = R(xn);
            } catch (const Error&) {
                dx *= 0.5;
                continue;
            }
            if (max_abs(rn) <= r0 || max_abs(rn) <= opt.tolerance) {
                accepted = true;
                break;
            }
            dx *= 0.5;
        }
        if (!accepted) {
            // Round-off floor: nothing left to gain.
            if (r0 <= 1e3 * opt.tolerance) break;
            fail(ErrorKind::NoConvergence, "decomposition Newton stalled at residual " + fmt_double(r0));
        }
        const double step = dx.cwiseAbs().maxCoeff();
        x = xn;
        r = rn;
        converged = max_abs(r) <= opt.tolerance ||
                    (step <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff()) && max_abs(r) <= 1e3 * opt.tolerance);
    }
    Decomposition d = assemble(v, from_vector(x), tr);
    d.iterations = it;
    d.jacobian_condition = cond;
    return d;
}

Decomposition fit_parameters(const GraphField& v, double a_prev, FitMode mode, const FitOptions& opt) {
    if (mode == FitMode::Optimal) return optimal_refit(v, Frame{}, 1.0).dec;
    for (double x : v.values)
        if (!(x > 0.0)) fail(ErrorKind::NonPositiveRadius, "decomposition needs a positive graph");
    return fit_parameters(v, heuristic_guess(v, a_prev), opt);
}

namespace {

bool theta_independent(const GraphField& v) {
    for (int i = 0; i < v.ny; ++i)
        for (int j = 1; j < v.nth; ++j)
            if (v(i, j) != v(i, 0)) return false;
    return true;
}

}  // namespace

OptimalResult optimal_refit(const GraphField& v, const Frame& frame, double lambda,
                            const OptimalOptions& opt) {
    const Decomposition interior = fit_parameters(v, 0.5);
    const ProfileParams& ip = interior.params;
    const bool axisym = theta_independent(v);

    ResampleOptions ro;
    ro.max_rotation = opt.max_rotation;
    ro.max_translation = opt.max_translation;
    if (ip.a >= 0.0 && ip.a < 1.0 && ip.b >= 0.0) ro.far_field = FormalProfile(ip.a, ip.b);
    const Trig tr(v);

    // x = (log s, b, axial, shift1, shift2, tilt1, tilt2)
    Eigen::Matrix<double, 7, 1> x = Eigen::Matrix<double, 7, 1>::Zero();
    const double denom = 2.0 - 2.0 * ip.a - 0.5 * ip.b;
    const double s0 = denom > 0.0 ? 1.0 / std::sqrt(denom) : 1.0;
    x[0] = std::log(s0);
    x[1] = std::max(0.0, ip.b * s0 * s0);
    if (ip.b > 1e-3) {
        const double V0 = profile_raw(ip.a, ip.b, 0.0);
        x[2] = std::clamp(-ip.beta[0] * (2.0 - 2.0 * ip.a) * V0 / ip.b, -0.5, 0.5);
    }
    if (!axisym) {
        x[3] = ip.beta[1];
        x[4] = ip.beta[2];
        x[5] = ip.beta[3];
        x[6] = ip.beta[4];
    }

    auto motion_of = [](const Eigen::Matrix<double, 7, 1>& xx) {
        return RigidMotion::from_params(xx[2], xx[3], xx[4], xx[5], xx[6]);
    };
    auto moved_graph = [&](const Eigen::Matrix<double, 7, 1>& xx) {
        ResampleOptions o = ro;
        o.scale = std::exp(xx[0]);
        return resample_graph(v, motion_of(xx), o);
    };
    auto R = [&](const Eigen::Matrix<double, 7, 1>& xx) {
        ProfileParams p;
        p.b = xx[1];
        p.a = 0.5 - 0.25 * p.b;
        if (!admissible(p, v.y_max)) fail(ErrorKind::NoConvergence, "optimal refit left the admissible set");
        const std::array<double, 7> r = interior_residual(moved_graph(xx), p, tr);
        Eigen::Matrix<double, 7, 1> e;
        for (int k = 0; k < 7; ++k) e[k] = r[k];
        return e;
    };

    // Unknown k is paired with residual row k through this map: scale <-> constant,
    // b <-> y^2 mode, axial shift <-> y, shifts <-> cos/sin, tilts <-> y cos/y sin.
    const int unknown_rows[7] = {0, 2, 1, 3, 4, 5, 6};
    std::vector<int> active = axisym ? std::vector<int>{0, 1, 2} : std::vector<int>{0, 1, 2, 3, 4, 5, 6};
    const int n = static_cast<int>(active.size());

    Eigen::Matrix<double, 7, 1> r = R(x);
    auto active_res = [&](const Eigen::Matrix<double, 7, 1>& rr) {
        Eigen::VectorXd e(n);
        for (int k = 0; k < n; ++k) e[k] = rr[unknown_rows[active[k]]];
        return e;
    };
    Eigen::MatrixXd J(n, n);
    bool have_j = false;
    int it = 0;
    double prev = active_res(r).cwiseAbs().maxCoeff();
    while (active_res(r).cwiseAbs().maxCoeff() > opt.tolerance) {
        if (it >= opt.max_iterations)
            fail(ErrorKind::NoConvergence, "optimal refit exceeded " + std::to_string(opt.max_iterations) +
                                               " iterations (residual " + fmt_double(prev) + ")");
        ++it;
        if (!have_j) {
            const Eigen::VectorXd r0 = active_res(r);
            for (int c = 0; c < n; ++c) {
                Eigen::Matrix<double, 7, 1> xh = x;
                xh[active[c]] += opt.fd_step;
                J.col(c) = (active_res(R(xh)) - r0) / opt.fd_step;
            }
            have_j = true;
        }
        const Eigen::VectorXd dx = -J.fullPivLu().solve(active_res(r));
        if (!dx.allFinite() || dx.cwiseAbs().maxCoeff() > 0.5)
            fail(ErrorKind::NoConvergence, "optimal refit step left the basin");
        Eigen::Matrix<double, 7, 1> xn = x;
        for (int k = 0; k < n; ++k) xn[active[k]] += dx[k];
        const Eigen::Matrix<double, 7, 1> rn = R(xn);
        const double now = active_res(rn).cwiseAbs().maxCoeff();
        // Chord iteration; refresh the Jacobian when the contraction is poor.
        if (now > 0.25 * prev) have_j = false;
        if (now > prev && it > 1 && prev <= 1e3 * opt.tolerance) break;
        x = xn;
        r = rn;
        prev = now;
    }

    OptimalResult res;
    res.scale = std::exp(x[0]);
    res.lambda_opt = lambda * res.scale;
    res.b_opt = x[1];
    res.motion = motion_of(x);
    RigidMotion physical = res.motion;
    physical.phi *= lambda;
    res.frame = moved(frame, physical);
    res.v = moved_graph(x);
    ProfileParams p;
    p.b = res.b_opt;
    p.a = 0.5 - 0.25 * p.b;
    res.dec = assemble(res.v, p, tr);
    res.iterations = it;
    return res;
}

XiTerms xi_rhs_terms(const GraphField& v, const ProfileParams& p, double a_tau, double b_tau,
                     const std::array<double, 5>& beta_tau) {
    const double a = p.a, b = p.b;
    const GaugeFields gf = gauge_fields(v, p);
    const GraphField& xi = gf.xi;
    const GraphField xi_yy = d_y(xi, 2);
    const GraphField xi_tt = d_theta(xi, 2);
    const GraphField vy = d_y(v, 1);
    const GraphField vyy = d_y(v, 2);
    const GraphField vt = d_theta(v, 1);
    const GraphField vtt = d_theta(v, 2);
    const GraphField vyt = d_y(vt, 1);
    const Trig tr(v);
    const auto& bt = p.beta;

    XiTerms t;
    t.linear = v.like();
    t.F1 = v.like();
    t.F2 = v.like();
    t.N1 = v.like();
    t.N2 = v.like();
    t.N3 = v.like();
    const double c2a = std::sqrt(2.0 - 2.0 * a);
    for (int i = 0; i < v.ny; ++i) {
        const double y = v.y(i);
        const double y2 = y * y;
        const double G = std::exp(-0.25 * a * y2);
        const double r2 = 2.0 + b * y2;
        const double sr = std::sqrt(r2);
        const double V = sr / c2a;
        const double Vm2 = (2.0 - 2.0 * a) / r2;
        const double F1 = G * (2.0 * b / (c2a * r2 * sr) - a * b * y2 / (c2a * sr) + a * V - c2a / sr -
                               0.5 * b_tau * y2 / (c2a * sr) - sr / (c2a * c2a * c2a) * a_tau);
        for (int j = 0; j < v.nth; ++j) {
            const double c = tr.c[j], s = tr.s[j];
            const double x = xi(i, j);
            t.linear(i, j) = xi_yy(i, j) - 0.25 * (a * a + a_tau) * y2 * x + 1.5 * a * x + Vm2 * x +
                             0.5 * xi_tt(i, j);
            t.F1(i, j) = F1;

            const double B = bt[0] * y + bt[1] * c + bt[2] * s + bt[3] * y * c + bt[4] * y * s;
            const double B_tt = -(bt[1] * c + bt[2] * s + bt[3] * y * c + bt[4] * y * s);
            const double B_y = bt[0] + bt[3] * c + bt[4] * s;
            const double B_tau = beta_tau[0] * y + beta_tau[1] * c + beta_tau[2] * s +
                                 beta_tau[3] * y * c + beta_tau[4] * y * s;
            t.F2(i, j) = G * (Vm2 * B_tt - a * y * B_y + a * B + Vm2 * B - B_tau);

            const double u = v(i, j);
            const double pert = u - V;  // phi + beta terms
            t.N1(i, j) = -G * pert * pert * Vm2 / u;

            const double pp = vy(i, j);
            const double q = vt(i, j) / u;
            const double D = 1.0 + pp * pp + q * q;
            t.N2(i, j) = -G * pp * pp / D * vyy(i, j);
            // Minus sign on the first-order theta term, as in rhs_rescaled.
            t.N3(i, j) = (Vm2 - 0.5) * xi_tt(i, j) +
                         G * ((1.0 + pp * pp) / (D * u * u) - Vm2) * vtt(i, j) -
                         G * 2.0 * pp * q / (D * u) * vyt(i, j) - G * q / (D * u * u) * vt(i, j);
        }
    }
    return t;
}

XiResidual xi_evolution_residual(const std::vector<XiSample>& window, double kappa0, int at) {
    if (window.size() < 3) fail(ErrorKind::InsufficientHistory, "xi residual needs three samples");
    const XiSample& s0 = window[0];
    const XiSample& s1 = window[1];
    const XiSample& s2 = window[2];
    if (s0.segment != s1.segment || s1.segment != s2.segment)
        fail(ErrorKind::InsufficientHistory, "xi residual window straddles a frame change");
    if (!(s0.tau < s1.tau && s1.tau < s2.tau))
        fail(ErrorKind::InsufficientHistory, "xi residual window must be increasing in tau");
    if (at < 0 || at > 2) fail(ErrorKind::InvalidArgument, "xi residual evaluation index must be 0, 1 or 2");
    const XiSample& sc = window[static_cast<std::size_t>(at)];
    const std::vector<double> w =
        fornberg_weights(sc.tau, {s0.tau, s1.tau, s2.tau}, 1);
    auto rate = [&](double f0, double f1, double f2) { return w[0] * f0 + w[1] * f1 + w[2] * f2; };
    const double a_tau = rate(s0.params.a, s1.params.a, s2.params.a);
    const double b_tau = rate(s0.params.b, s1.params.b, s2.params.b);
    std::array<double, 5> beta_tau{};
    for (int k = 0; k < 5; ++k) beta_tau[k] = rate(s0.params.beta[k], s1.params.beta[k], s2.params.beta[k]);

    XiResidual out;
    out.terms = xi_rhs_terms(sc.v, sc.params, a_tau, b_tau, beta_tau);
    const GraphField x0 = gauge_fields(s0.v, s0.params).xi;
    const GraphField x1 = gauge_fields(s1.v, s1.params).xi;
    const GraphField x2 = gauge_fields(s2.v, s2.params).xi;
    XiTerms& t = out.terms;
    t.dxi_dtau = sc.v.like();
    t.residual = sc.v.like();
    const double beta = 1.0 / (kappa0 + sc.tau);
    for (int i = 0; i < sc.v.ny; ++i) {
        const double y = sc.v.y(i);
        const double inner_w = std::pow(1.0 + y * y, -1.5) * std::exp(0.25 * sc.params.a * y * y);
        const bool inner = beta * y * y <= 20.0;
        for (int j = 0; j < sc.v.nth; ++j) {
            const double d = rate(x0(i, j), x1(i, j), x2(i, j));
            t.dxi_dtau(i, j) = d;
            const double r = d - (t.linear(i, j) + t.F1(i, j) + t.F2(i, j) + t.N1(i, j) + t.N2(i, j) +
                                  t.N3(i, j));
            t.residual(i, j) = r;
            // Boundary rows carry the boundary condition, not the equation.
            if (i == 0 || i == sc.v.ny - 1) continue;
            out.sup = std::max(out.sup, std::abs(r));
            if (inner) out.inner_weighted = std::max(out.inner_weighted, inner_w * std::abs(r));
        }
    }
    return out;
}

std::pair<std::vector<std::complex<double>>, std::vector<std::complex<double>>> fourier_pm(
    const GraphField& f) {
    std::vector<std::complex<double>> plus(f.ny), minus(f.ny);
    for (int i = 0; i < f.ny; ++i) {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < f.nth; ++j) {
            const double th = f.theta(j);
            re += f(i, j) * std::cos(th);
            im -= f(i, j) * std::sin(th);
        }
        plus[i] = {re / f.nth, im / f.nth};
        minus[i] = std::conj(plus[i]);
    }
    return {plus, minus};
}

}  // namespace neck
