#include "neckpinch/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <sstream>

#include "neckpinch/derivatives.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/numfmt.hpp"

namespace neck {

std::array<double, 4> theta_energy(const GraphField& v, const WeightedMeasure& w) {
    const std::vector<double> wy = simpson_weights(v.ny, v.dy());
    std::array<double, 4> e{};
    for (int i = 0; i < v.ny; ++i) {
        const double mu = mu_weight(w, v.y(i));
        for (int k = 0; k < 4; ++k) {
            std::complex<double> cp = 0.0, cm = 0.0;
            for (int j = 0; j < v.nth; ++j) {
                const double th = v.theta(j);
                cp += v(i, j) * std::complex<double>(std::cos(k * th), -std::sin(k * th));
                cm += v(i, j) * std::complex<double>(std::cos(k * th), std::sin(k * th));
            }
            cp /= static_cast<double>(v.nth);
            cm /= static_cast<double>(v.nth);
            const double p = k == 0 ? std::norm(cp) : std::norm(cp) + std::norm(cm);
            e[k] += wy[i] * mu * 2.0 * kPi * p;
        }
    }
    return e;
}

double LyapunovTable::at(int m, int n) const {
    const auto it = omega.find({m, n});
    if (it == omega.end())
        fail(ErrorKind::InvalidArgument, "Omega index outside 2 <= m+n <= 5");
    return it->second;
}

LyapunovTable lyapunov_table(const GraphField& v, const WeightedMeasure& w) {
    const std::vector<double> wy = simpson_weights(v.ny, v.dy());
    const double wt = v.dth();
    LyapunovTable t;
    std::vector<GraphField> dth(6);
    dth[0] = v;
    for (int n = 1; n <= 5; ++n) dth[n] = d_theta(v, n);
    for (int total = 2; total <= 5; ++total) {
        for (int n = 0; n <= total; ++n) {
            const int m = total - n;
            // Seven-point stencils for every order up to five.
            const int acc = m == 5 ? 2 : (m >= 3 ? 4 : 6);
            const GraphField d = m == 0 ? dth[n] : d_y(dth[n], m, acc);
            double s = 0.0;
            for (int i = 0; i < v.ny; ++i) {
                const double mu = mu_weight(w, v.y(i));
                for (int j = 0; j < v.nth; ++j) {
                    const double q = d(i, j) / std::pow(v(i, j), n);
                    s += wy[i] * wt * mu * q * q;
                }
            }
            t.omega[{m, n}] = s;
        }
    }
    return t;
}

Constants default_constants() {
    return {
        {"kappa0", 10.0},
        {"M", 100.0},
        {"eps0", 0.5},
        {"delta", 0.1},
        {"C_star", 4.0},
        {"C1a", 1.0},
        {"C1b", 1.0},
        {"C1c", 1.0},
        {"C2a", 1.0},
        {"C2b", 1.0},
        {"C2c", 1.0},
        {"C2d", 1.0},
        {"C3a", 1.0},
        {"C3b", 1.0},
        {"C3s", 1.0},
        {"C1i_a", 1.0},
        {"C1i_b", 1.0},
        {"C2i", 1.0},
        {"Cout_vy", 1.0},
        {"Cout_vth2", 1.0},
        {"Cout_vth1", 1.0},
        {"Cout_second", 1.0},
        {"Cout_second_small", 1.0},
        {"Cout_third", 1.0},
        {"Cout_third_small", 1.0},
        // Initial-data checks.
        {"c0", 0.05},
        {"c_star", 0.5},
        {"A7_bound", 1e6},
    };
}

Constants load_constants(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::Io, "cannot open constants file " + path);
    Constants c = default_constants();
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            fail(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(" \t"));
        key.erase(key.find_last_not_of(" \t\r") + 1);
        if (!c.count(key)) fail(ErrorKind::Config, path + ": unknown constant '" + key + "'");
        double v = 0.0;
        if (!parse_double(line.substr(eq + 1), v))
            fail(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": bad number for '" + key + "'");
        c[key] = v;
    }
    return c;
}

void save_constants(const Constants& c, const std::string& path) {
    std::ofstream os(path);
    if (!os) fail(ErrorKind::Io, "cannot write " + path);
    for (const auto& [k, v] : c) os << k << " = " << fmt_double(v) << '\n';
}

double constant(const Constants& c, const std::string& key) {
    const auto it = c.find(key);
    if (it == c.end()) fail(ErrorKind::Config, "missing constant '" + key + "'");
    return it->second;
}

void ConditionReport::add(const std::string& name, double measured, double bound) {
    Margin m;
    m.name = name;
    m.measured = measured;
    m.bound = bound;
    m.margin = bound > 0.0 ? measured / bound : (measured > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    entries.push_back(m);
}

const Margin& ConditionReport::get(const std::string& name) const {
    for (const auto& e : entries)
        if (e.name == name) return e;
    fail(ErrorKind::InvalidArgument, "no condition named " + name);
}

bool ConditionReport::has(const std::string& name) const {
    return std::any_of(entries.begin(), entries.end(), [&](const Margin& e) { return e.name == name; });
}

bool ConditionReport::all_hold() const {
    return std::all_of(entries.begin(), entries.end(), [](const Margin& e) { return e.margin <= 1.0; });
}

double ConditionReport::worst() const {
    double w = 0.0;
    for (const auto& e : entries) w = std::max(w, e.margin);
    return w;
}

ConditionReport condition_check(const GraphField& v, double tau, double a, const Constants& c) {
    const double kappa0 = constant(c, "kappa0");
    const double beta = beta_of_tau(BetaClock{kappa0}, tau);
    const double beta0 = 1.0 / kappa0;
    const double eps0 = constant(c, "eps0");
    const double M = constant(c, "M");

    const GraphField vy = d_y(v, 1), vyy = d_y(v, 2), vyyy = d_y(v, 3);
    const GraphField vt = d_theta(v, 1), vtt = d_theta(v, 2), vttt = d_theta(v, 3);
    const GraphField vyt = d_y(vt, 1), vyyt = d_y(vt, 2), vytt = d_y(vtt, 1);

    // Theta mean and its complement.
    std::vector<double> v1(v.ny, 0.0);
    for (int i = 0; i < v.ny; ++i) {
        for (int j = 0; j < v.nth; ++j) v1[i] += v(i, j);
        v1[i] /= v.nth;
    }
    const auto [vp, vm] = fourier_pm(v);
    const auto [vyp, vym] = fourier_pm(vy);

    double vmin = std::numeric_limits<double>::infinity();
    double c1a = 0, c1b = 0, c1c = 0, c2a = 0, c2b = 0, c2c = 0, c2d = 0, c3a = 0, c3b = 0, c3s = 0;
    double cg = 0, cr = 0, g_ratio = 0, inner_low = 0, inner_high = 0, c1i_a = 0, c1i_b = 0, c2i = 0;
    double o_vy = 0, o_vy_eps = 0, o_vth2 = 0, o_vth1 = 0, o_second = 0, o_second_small = 0,
           o_third = 0, o_third_small = 0;
    for (int i = 0; i < v.ny; ++i) {
        const double y = v.y(i);
        const bool inner = beta * y * y <= 20.0;
        const double g = g_step(y, beta);
        if (inner) c2i = std::max(c2i, std::abs(vp[i]) + std::abs(vm[i]) + std::abs(vyp[i]) + std::abs(vym[i]));
        for (int j = 0; j < v.nth; ++j) {
            const double u = v(i, j);
            vmin = std::min(vmin, u);
            const double ay = std::abs(vy(i, j)), at = std::abs(vt(i, j));
            const double ayy = std::abs(vyy(i, j)), ayt = std::abs(vyt(i, j)), att = std::abs(vtt(i, j));
            const double ayyy = std::abs(vyyy(i, j)), ayyt = std::abs(vyyt(i, j));
            const double aytt = std::abs(vytt(i, j)), attt = std::abs(vttt(i, j));
            c1a = std::max(c1a, ay / std::sqrt(u));
            c1b = std::max(c1b, at / (u * u));
            c1c = std::max(c1c, at / u);
            c2a = std::max(c2a, ayy);
            c2b = std::max(c2b, ayt / u);
            c2c = std::max(c2c, ayt);
            c2d = std::max(c2d, att / (u * u));
            c3a = std::max(c3a, ayyy);
            c3b = std::max({c3b, ayyt / u, aytt / (u * u), attt / (u * u * u)});
            c3s = std::max(c3s, std::pow(beta, -11.0 / 20.0) * (ayyy + ayyt) + aytt + attt / u);
            cg = std::max(cg, ay / japanese(y));
            if (v1[i] > 0.0) cr = std::max(cr, std::abs(u - v1[i]) / v1[i]);
            g_ratio = std::max(g_ratio, g / u);
            if (inner) {
                inner_low = std::max(inner_low, g / u);
                inner_high = std::max(inner_high, u);
                c1i_a = std::max(c1i_a, ay / std::sqrt(u));
                c1i_b = std::max(c1i_b, at / u);
            }
            o_vy = std::max(o_vy, ay / std::sqrt(u));
            o_vy_eps = std::max(o_vy_eps, ay);
            o_vth2 = std::max(o_vth2, at / (u * u));
            o_vth1 = std::max(o_vth1, at / u);
            o_second = std::max(o_second, beta * ayy + ayt / u + att / (u * u));
            o_second_small = std::max(o_second_small, ayt + att / u);
            o_third = std::max(o_third, std::sqrt(beta) * ayyy + ayyt / u + aytt / (u * u) + attt / (u * u * u));
            o_third_small = std::max(o_third_small, std::pow(beta, -11.0 / 20.0) * (ayyy + ayyt) + aytt + attt / u);
        }
    }

    ConditionReport r;
    r.add("C0", 1.0 / kappa0, vmin);
    r.add("C1a", c1a, constant(c, "C1a") * std::pow(beta, 0.4));
    r.add("C1b", c1b, constant(c, "C1b") * std::pow(beta, 1.5));
    r.add("C1c", c1c, constant(c, "C1c"));
    r.add("C2a", c2a, constant(c, "C2a") * std::pow(beta, 0.6));
    r.add("C2b", c2b, constant(c, "C2b") * std::pow(beta, 1.5));
    r.add("C2c", c2c, constant(c, "C2c"));
    r.add("C2d", c2d, constant(c, "C2d") * std::pow(beta, 1.5));
    r.add("C3a", c3a, constant(c, "C3a") * beta);
    r.add("C3b", c3b, constant(c, "C3b") * std::pow(beta, 1.5));
    r.add("C3s", c3s, constant(c, "C3s") * std::pow(beta0 + eps0, 1.0 / 40.0));
    r.add("Ca", std::abs(a - 0.5), 1.0 / kappa0);
    r.add("Cg", cg, std::pow(M, 0.25) * beta);
    r.add("Cr", cr, constant(c, "delta"));
    r.add("C0i_lower", inner_low, 1.0);
    r.add("C0i_upper", inner_high, constant(c, "C_star"));
    r.add("C1i_a", c1i_a, constant(c, "C1i_a") * std::sqrt(beta));
    r.add("C1i_b", c1i_b, constant(c, "C1i_b") / std::sqrt(kappa0));
    r.add("C2i", c2i, constant(c, "C2i") * beta * beta);
    r.add("out_g", g_ratio, 1.0);
    r.add("out_vy", o_vy, constant(c, "Cout_vy") * std::sqrt(beta));
    r.add("out_vy_eps0", o_vy_eps, eps0);
    r.add("out_vth2", o_vth2, constant(c, "Cout_vth2") * std::pow(beta, 33.0 / 20.0));
    r.add("out_vth1", o_vth1, constant(c, "Cout_vth1") / std::sqrt(kappa0));
    r.add("out_second", o_second, constant(c, "Cout_second") * std::pow(beta, 33.0 / 20.0));
    r.add("out_second_small", o_second_small,
          constant(c, "Cout_second_small") * std::pow(beta0 + eps0, 1.0 / 20.0));
    r.add("out_third", o_third, constant(c, "Cout_third") * std::pow(beta, 33.0 / 20.0));
    r.add("out_third_small", o_third_small,
          constant(c, "Cout_third_small") * std::pow(beta0 + eps0, 1.0 / 20.0));
    return r;
}

double omega1(double a, double b) {
    if (!(a > 0.0 && a < 1.0) || b < 0.0) fail(ErrorKind::InvalidArgument, "omega1 needs 0 < a < 1, b >= 0");
    // e^{-a y^2/2} < e^{-40} beyond this cut.
    const double L = std::sqrt(80.0 / a);
    const int n = 4001;
    const double h = 2.0 * L / (n - 1);
    const std::vector<double> w = simpson_weights(n, h);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = -L + i * h;
        const double g = y * y * std::exp(-0.5 * a * y * y);
        num += w[i] * g * (2.0 - 2.0 * a) / (2.0 + b * y * y);
        den += w[i] * g;
    }
    return num / den;
}

namespace {

double centered(const std::vector<ParamPoint>& h, std::size_t k, double ParamPoint::*field) {
    const std::vector<double> x{h[k - 1].tau, h[k].tau, h[k + 1].tau};
    const std::vector<double> w = fornberg_weights(h[k].tau, x, 1);
    return w[0] * (h[k - 1].*field) + w[1] * (h[k].*field) + w[2] * (h[k + 1].*field);
}

}  // namespace

std::vector<OdeResidual> ode_residuals(const std::vector<ParamPoint>& history) {
    if (history.size() < 3) fail(ErrorKind::InsufficientHistory, "need at least 3 parameter samples");
    for (std::size_t k = 1; k < history.size(); ++k)
        if (!(history[k].tau > history[k - 1].tau))
            fail(ErrorKind::InvalidArgument, "parameter history must be strictly increasing in tau");
    std::vector<OdeResidual> out;
    for (std::size_t k = 1; k + 1 < history.size(); ++k) {
        const ParamPoint& p = history[k];
        const double a_tau = centered(history, k, &ParamPoint::a);
        const double b_tau = centered(history, k, &ParamPoint::b);
        const double beta0_tau = centered(history, k, &ParamPoint::beta0);
        OdeResidual r;
        r.tau = p.tau;
        r.gamma1 = p.b + 4.0 * p.a - 2.0 - a_tau / (1.0 - p.a);
        r.gamma2 = p.b * p.b + b_tau;
        r.omega1 = omega1(p.a, std::max(0.0, p.b));
        r.beta0_residual = beta0_tau - r.omega1 * p.beta0;
        out.push_back(r);
    }
    return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) fail(ErrorKind::InsufficientHistory, "linear fit needs two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) fail(ErrorKind::InvalidArgument, "linear fit with degenerate abscissae");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

FitResult asymptotic_fit(const std::vector<LawPoint>& history, double T_hat, std::size_t min_points) {
    if (history.size() < min_points)
        fail(ErrorKind::InsufficientHistory,
             "asymptotic fit needs " + std::to_string(min_points) + " points, got " +
                 std::to_string(history.size()));
    double gap_last = std::numeric_limits<double>::infinity();
    for (const auto& p : history) {
        const double gap = T_hat - p.t;
        if (!(gap > 0.0)) fail(ErrorKind::InvalidArgument, "history reaches past T_hat");
        gap_last = std::min(gap_last, gap);
    }
    std::vector<LawPoint> used;
    for (const auto& p : history)
        if (T_hat - p.t <= 10.0 * gap_last) used.push_back(p);
    if (used.size() < 3) used.assign(history.end() - static_cast<long>(std::min<std::size_t>(10, history.size())), history.end());

    FitResult r;
    r.T_hat = T_hat;
    r.n_used = used.size();
    std::vector<double> lx, ly, bx, by;
    double lsum = 0, bsum = 0;
    r.lambda_ratio_min = r.b_ratio_min = std::numeric_limits<double>::infinity();
    r.lambda_ratio_max = r.b_ratio_max = -std::numeric_limits<double>::infinity();
    for (const auto& p : used) {
        const double gap = T_hat - p.t;
        const double lr = p.lambda / std::sqrt(gap);
        const double br = p.b * std::log(1.0 / gap);
        lsum += lr;
        bsum += br;
        r.lambda_ratio_min = std::min(r.lambda_ratio_min, lr);
        r.lambda_ratio_max = std::max(r.lambda_ratio_max, lr);
        r.b_ratio_min = std::min(r.b_ratio_min, br);
        r.b_ratio_max = std::max(r.b_ratio_max, br);
        lx.push_back(std::log(gap));
        ly.push_back(std::log(p.lambda));
        if (gap < 1.0 && p.b > 0.0) {
            bx.push_back(std::log(std::log(1.0 / gap)));
            by.push_back(std::log(p.b));
        }
    }
    r.lambda_ratio_mean = lsum / used.size();
    r.b_ratio_mean = bsum / used.size();
    bool distinct = false;
    for (double x : lx) distinct = distinct || x != lx.front();
    if (distinct) {
        const LinearFit lf = linear_fit(lx, ly);
        r.lambda_slope = lf.slope;
        r.lambda_intercept = lf.intercept;
        r.lambda_r2 = lf.r2;
    }
    if (bx.size() >= 2) {
        bool bdistinct = false;
        for (double x : bx) bdistinct = bdistinct || x != bx.front();
        if (bdistinct) {
            const LinearFit bf = linear_fit(bx, by);
            r.b_slope = bf.slope;
            r.b_intercept = bf.intercept;
            r.b_r2 = bf.r2;
        }
    }
    return r;
}

void Majorants::update(double tau, const GraphField& phi, double a, double b, const BetaClock& clock) {
    const double beta = beta_of_tau(clock, tau);
    struct Entry {
        const char* key;
        double m;
        int n;
    };
    static const Entry entries[] = {{"3,0", 3.0, 0}, {"11/10,0", 1.1, 0}, {"2,1", 2.0, 1}, {"1,1", 1.0, 1}};
    for (const auto& e : entries) {
        const double val = std::pow(beta, -(e.m + e.n) / 2.0 - 0.1) * weighted_norm(phi, e.m, e.n);
        M_mn[e.key] = std::max(M_mn[e.key], val);
    }
    A = std::max(A, std::abs(a - 0.5 + 0.25 * b) / (beta * beta));
    B = std::max(B, std::abs(b - beta) / std::pow(beta, 1.5));
    const GraphField pt = d_theta(phi, 1);
    double s = 0.0;
    for (int i = 0; i < phi.ny; ++i) {
        const double w = std::pow(japanese(phi.y(i)), -5.0);
        for (int j = 0; j < phi.nth; ++j) s = std::max(s, w * std::abs(pt(i, j)));
    }
    M4 = std::max(M4, s / std::pow(beta, 2.1));
}

}  // namespace neck
