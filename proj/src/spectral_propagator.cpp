#include "neckpinch/spectral_propagator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include <limits>
#include <random>

#include "neckpinch/errors.hpp"
#include "neckpinch/numfmt.hpp"

namespace neck {

std::vector<SpectrumEntry> spectrum_L(double a, int j_max, int k_max) {
    if (!(a > 0.0)) fail(ErrorKind::InvalidArgument, "spectrum_L needs a > 0");
    if (j_max < 0 || k_max < 0) fail(ErrorKind::InvalidArgument, "spectrum_L needs nonnegative ranges");
    std::vector<std::pair<double, int>> raw;
    for (int j = 0; j <= j_max; ++j)
        for (int k = 0; k <= k_max; ++k) raw.push_back({a * (j - 2) + a * k * k, k == 0 ? 1 : 2});
    std::sort(raw.begin(), raw.end());
    std::vector<SpectrumEntry> out;
    for (const auto& [v, m] : raw) {
        if (!out.empty() && std::abs(out.back().value - v) <= 1e-12 * std::max(1.0, std::abs(v)))
            out.back().multiplicity += m;
        else
            out.push_back({v, m});
    }
    return out;
}

void hermite_orthonormal(int n, double x, double* out) {
    if (n <= 0) return;
    out[0] = std::pow(kPi, -0.25);
    if (n == 1) return;
    out[1] = kSqrt2 * x * out[0];
    for (int k = 1; k + 1 < n; ++k)
        out[k + 1] = std::sqrt(2.0 / (k + 1)) * x * out[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * out[k - 1];
}

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) fail(ErrorKind::InvalidArgument, "gauss_hermite needs n >= 1");
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    nodes.resize(n);
    weights.resize(n);
    std::vector<double> h(n + 1);
    for (int i = 0; i < n; ++i) {
        double x = es.eigenvalues()(i);
        // Newton on h_n with h_n' = sqrt(2n) h_{n-1}.
        for (int it = 0; it < 3; ++it) {
            hermite_orthonormal(n + 1, x, h.data());
            x -= h[n] / (std::sqrt(2.0 * n) * h[n - 1]);
        }
        hermite_orthonormal(n, x, h.data());
        // Christoffel form keeps relative accuracy at the extreme nodes.
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += h[k] * h[k];
        nodes[i] = x;
        weights[i] = 1.0 / s;
    }
}

std::vector<double> truncated_L_eigenvalues(double a, double b, int n_h, int k_max, int count) {
    if (!(a > 0.0 && a < 1.0) || b < 0.0) fail(ErrorKind::InvalidArgument, "need 0 < a < 1 and b >= 0");
    if (n_h < 4 || k_max < 0) fail(ErrorKind::InvalidArgument, "truncation too small");
    const double kap = std::sqrt(a / 2.0);
    std::vector<double> x, w;
    gauss_hermite(2 * n_h + 40, x, w);
    const int nq = static_cast<int>(x.size());
    // h[q][n] for n <= n_h so that derivative rows can reach n + 1.
    std::vector<std::vector<double>> h(nq, std::vector<double>(n_h + 1));
    for (int q = 0; q < nq; ++q) hermite_orthonormal(n_h + 1, x[q], h[q].data());
    auto dh = [&](int q, int n) {
        double r = -std::sqrt((n + 1) / 2.0) * h[q][n + 1];
        if (n > 0) r += std::sqrt(n / 2.0) * h[q][n - 1];
        return r;
    };
    Eigen::MatrixXd K0 = Eigen::MatrixXd::Zero(n_h, n_h);
    for (int q = 0; q < nq; ++q) {
        const double z = x[q] / kap;
        const double pot = a * a * z * z / 4.0 - 1.5 * a - (2.0 - 2.0 * a) / (2.0 + b * z * z);
        for (int m = 0; m < n_h; ++m) {
            const double dm = dh(q, m);
            for (int n = 0; n <= m; ++n) {
                const double val = w[q] * (kap * kap * dm * dh(q, n) + pot * h[q][m] * h[q][n]);
                K0(m, n) += val;
            }
        }
    }
    for (int m = 0; m < n_h; ++m)
        for (int n = m + 1; n < n_h; ++n) K0(m, n) = K0(n, m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K0, Eigen::EigenvaluesOnly);
    std::vector<double> all;
    for (int k = 0; k <= k_max; ++k)
        for (int i = 0; i < n_h; ++i) {
            const double ev = es.eigenvalues()(i) + 0.5 * k * k;
            all.push_back(ev);
            if (k > 0) all.push_back(ev);
        }
    std::sort(all.begin(), all.end());
    if (count > static_cast<int>(all.size())) count = static_cast<int>(all.size());
    all.resize(count);
    return all;
}

void OscillatorSpec::validate() const {
    if (!(alpha > 0.0)) fail(ErrorKind::InvalidArgument, "alpha must be positive");
    if (n_h < 4 || n_h > 400) fail(ErrorKind::InvalidArgument, "Hermite truncation out of range");
}

std::vector<Eigenpair> oscillator_eigens(const OscillatorSpec& spec, int count) {
    spec.validate();
    const double kap = std::sqrt(spec.alpha / 2.0);
    std::vector<Eigenpair> out;
    for (int n = 0; n < count; ++n) {
        Eigenpair e;
        e.value = spec.eigenvalue(n);
        e.f = [kap, n](double z) {
            std::vector<double> hv(n + 1);
            const double xx = kap * z;
            hermite_orthonormal(n + 1, xx, hv.data());
            return std::sqrt(kap) * hv[n] * std::exp(-0.5 * xx * xx);
        };
        out.push_back(std::move(e));
    }
    return out;
}

double HermiteExpansion::eval_ungauged(double z) const {
    const double kap = std::sqrt(alpha / 2.0);
    const int n = static_cast<int>(c.size());
    if (n == 0) return 0.0;
    // Same recurrence, accumulated on the fly.
    const double xx = kap * z;
    double hm = 0.0, h0 = std::pow(kPi, -0.25);
    double s = c[0] * h0;
    for (int k = 0; k + 1 < n; ++k) {
        const double hp = (k == 0) ? kSqrt2 * xx * h0
                                   : std::sqrt(2.0 / (k + 1)) * xx * h0 - std::sqrt(static_cast<double>(k) / (k + 1)) * hm;
        hm = h0;
        h0 = hp;
        s += c[k + 1] * h0;
    }
    return std::sqrt(kap) * s;
}

double HermiteExpansion::eval(double z) const {
    return std::exp(-alpha * z * z / 4.0) * eval_ungauged(z);
}

HermiteExpansion hermite_expand(const OscillatorSpec& spec, const std::function<double(double)>& u) {
    spec.validate();
    const double kap = std::sqrt(spec.alpha / 2.0);
    std::vector<double> x, w;
    gauss_hermite(2 * spec.n_h + 40, x, w);
    HermiteExpansion e;
    e.alpha = spec.alpha;
    e.c.assign(spec.n_h, 0.0);
    std::vector<double> hv(spec.n_h);
    for (std::size_t q = 0; q < x.size(); ++q) {
        const double uq = u(x[q] / kap);
        hermite_orthonormal(spec.n_h, x[q], hv.data());
        for (int n = 0; n < spec.n_h; ++n) e.c[n] += w[q] * uq * hv[n];
    }
    double total = 0.0, tail = 0.0;
    for (int n = 0; n < spec.n_h; ++n) {
        e.c[n] /= std::sqrt(kap);
        total += e.c[n] * e.c[n];
        if (n >= spec.n_h - 4) tail = std::max(tail, std::abs(e.c[n]));
    }
    e.truncation_warning = total > 0.0 && tail > 1e-10 * std::sqrt(total);
    return e;
}

HermiteExpansion semigroup_apply(const OscillatorSpec& spec, double sigma, const HermiteExpansion& f) {
    spec.validate();
    if (f.alpha != spec.alpha) fail(ErrorKind::InvalidArgument, "expansion and operator use different alpha");
    HermiteExpansion r = f;
    for (std::size_t n = 0; n < r.c.size(); ++n) r.c[n] *= std::exp(-sigma * spec.eigenvalue(static_cast<int>(n)));
    return r;
}

double semigroup_kernel_apply(const OscillatorSpec& spec, double sigma, const std::function<double(double)>& f,
                              double z) {
    spec.validate();
    if (!(sigma > 0.0)) fail(ErrorKind::InvalidArgument, "kernel needs sigma > 0");
    const double om = spec.alpha / 2.0;
    const double sh = std::sinh(2.0 * om * sigma), ch = std::cosh(2.0 * om * sigma);
    const double pref = std::sqrt(om / (2.0 * kPi * sh)) * std::exp(sigma * (1.5 * spec.alpha - spec.shift));
    const double L = 40.0 / std::sqrt(spec.alpha);
    const int n = 8001;
    const double h = 2.0 * L / (n - 1);
    const std::vector<double> w = simpson_weights(n, h);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        const double y = -L + i * h;
        const double e = -om * ((z * z + y * y) * ch - 2.0 * z * y) / (2.0 * sh);
        s += w[i] * std::exp(e) * f(y);
    }
    return pref * s;
}

ProjectorTag projector_from_string(const std::string& s) {
    if (s == "P1") return ProjectorTag::P1;
    if (s == "P2") return ProjectorTag::P2;
    if (s == "P3") return ProjectorTag::P3;
    if (s == "P7") return ProjectorTag::P7;
    fail(ErrorKind::InvalidArgument, "unknown projector " + s);
}

namespace {

int rank_of(ProjectorTag t) {
    switch (t) {
        case ProjectorTag::P1: return 1;
        case ProjectorTag::P2: return 2;
        case ProjectorTag::P3: return 3;
        case ProjectorTag::P7: break;
    }
    fail(ErrorKind::InvalidArgument, "P7 acts on two-dimensional fields only");
}

// Orthonormalizes `basis` in place against the weighted inner product (two passes of
// modified Gram-Schmidt).
void orthonormalize(std::vector<std::vector<double>>& basis, const std::vector<double>& w) {
    auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i] * b[i];
        return s;
    };
    for (std::size_t k = 0; k < basis.size(); ++k) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < k; ++j) {
                const double c = dot(basis[k], basis[j]);
                for (std::size_t i = 0; i < basis[k].size(); ++i) basis[k][i] -= c * basis[j][i];
            }
        const double nrm = std::sqrt(dot(basis[k], basis[k]));
        for (double& x : basis[k]) x /= nrm;
    }
}

void remove_span(std::vector<double>& f, const std::vector<std::vector<double>>& basis, const std::vector<double>& w) {
    for (const auto& e : basis) {
        double c = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) c += w[i] * f[i] * e[i];
        for (std::size_t i = 0; i < f.size(); ++i) f[i] -= c * e[i];
    }
}

}  // namespace

HermiteExpansion project(ProjectorTag tag, const HermiteExpansion& f) {
    const int r = rank_of(tag);
    HermiteExpansion g = f;
    for (int n = 0; n < r && n < static_cast<int>(g.c.size()); ++n) g.c[n] = 0.0;
    return g;
}

std::vector<double> project_samples(ProjectorTag tag, double alpha, double z_max, const std::vector<double>& f) {
    const int r = rank_of(tag);
    const int n = static_cast<int>(f.size());
    if (n < 5) fail(ErrorKind::InvalidArgument, "too few samples to project");
    const double h = 2.0 * z_max / (n - 1);
    const std::vector<double> w = simpson_weights(n, h);
    std::vector<std::vector<double>> basis(r, std::vector<double>(n));
    for (int i = 0; i < n; ++i) {
        const double z = -z_max + i * h;
        const double g = std::exp(-alpha * z * z / 4.0);
        for (int k = 0; k < r; ++k) basis[k][i] = std::pow(z, k) * g;
    }
    orthonormalize(basis, w);
    std::vector<double> out = f;
    remove_span(out, basis, w);
    return out;
}

GraphField project_field(ProjectorTag tag, double alpha, const GraphField& f) {
    const int n = static_cast<int>(f.size());
    std::vector<double> w(n);
    const std::vector<double> wy = simpson_weights(f.ny, f.dy());
    for (int i = 0; i < f.ny; ++i)
        for (int j = 0; j < f.nth; ++j) w[i * f.nth + j] = wy[i] * f.dth();
    std::vector<std::vector<double>> basis;
    auto add = [&](int power, int trig) {
        std::vector<double> e(n);
        for (int i = 0; i < f.ny; ++i) {
            const double z = f.y(i);
            const double g = std::pow(z, power) * std::exp(-alpha * z * z / 4.0);
            for (int j = 0; j < f.nth; ++j) {
                const double th = f.theta(j);
                const double t = trig == 0 ? 1.0 : (trig == 1 ? std::cos(th) : std::sin(th));
                e[i * f.nth + j] = g * t;
            }
        }
        basis.push_back(std::move(e));
    };
    if (tag == ProjectorTag::P7) {
        for (int p = 0; p < 3; ++p) add(p, 0);
        for (int p = 0; p < 2; ++p) add(p, 1);
        for (int p = 0; p < 2; ++p) add(p, 2);
        orthonormalize(basis, w);
        GraphField out = f;
        remove_span(out.values, basis, w);
        return out;
    }
    // Column by column in y for the one-dimensional projectors.
    GraphField out = f;
    std::vector<double> col(f.ny);
    for (int j = 0; j < f.nth; ++j) {
        for (int i = 0; i < f.ny; ++i) col[i] = f(i, j);
        const std::vector<double> p = project_samples(tag, alpha, f.y_max, col);
        for (int i = 0; i < f.ny; ++i) out(i, j) = p[i];
    }
    return out;
}

namespace {

// Portable uniform draw in [lo, hi) from the raw 64-bit stream.
double uniform(std::mt19937_64& g, double lo, double hi) {
    const double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

struct Sector {
    int k = 0;
    int trig = 0;  // 0 constant, 1 cos, 2 sin
    HermiteExpansion e;
    OscillatorSpec op;
};

}  // namespace

DecayReport propagator_decay_experiment(const OscillatorSpec& spec, double ell, int trials, std::uint64_t seed,
                                        const DecayOptions& opt) {
    spec.validate();
    if (!(ell > 0.0)) fail(ErrorKind::InvalidArgument, "weight exponent must be positive");
    if (trials < 1) fail(ErrorKind::InvalidArgument, "need at least one trial");
    if (opt.n_sigma < 2 || !(opt.sigma_max > opt.sigma_min)) fail(ErrorKind::InvalidArgument, "bad sigma range");
    const bool one_d = std::abs(ell - 1.1) < 1e-12;
    const double alpha = spec.alpha;
    std::mt19937_64 gen(seed);

    std::vector<double> zs(opt.n_z), wz(opt.n_z);
    for (int i = 0; i < opt.n_z; ++i) {
        zs[i] = -opt.z_window + 2.0 * opt.z_window * i / (opt.n_z - 1);
        wz[i] = std::pow(japanese(zs[i]), -ell);
    }
    const int n_theta = 32;
    std::vector<double> sigmas(opt.n_sigma);
    for (int s = 0; s < opt.n_sigma; ++s)
        sigmas[s] = opt.sigma_min + (opt.sigma_max - opt.sigma_min) * s / (opt.n_sigma - 1);
    const int degree = one_d ? 1 : std::min(5, static_cast<int>(std::floor(ell)));

    DecayReport report;
    report.worst_rate = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        std::vector<Sector> sectors;
        auto make_envelope = [&]() {
            std::vector<double> poly(degree + 1), bump(4);
            for (int d = 0; d <= degree; ++d) poly[d] = uniform(gen, -1.0, 1.0) * std::pow(0.5, d);
            for (double& q : bump) q = uniform(gen, -1.0, 1.0);
            const double width = uniform(gen, 2.0, 4.0);
            return [poly, bump, width](double z) {
                double p = 0.0, zz = 1.0;
                for (double c : poly) {
                    p += c * zz;
                    zz *= z;
                }
                const double q = bump[0] + z * (bump[1] + z * (bump[2] + z * bump[3]));
                return p + q * std::exp(-z * z / (2.0 * width * width));
            };
        };
        if (one_d) {
            Sector s;
            s.op = spec;
            s.e = project(ProjectorTag::P2, hermite_expand(s.op, make_envelope()));
            sectors.push_back(std::move(s));
        } else {
            for (int k = 0; k <= 3; ++k)
                for (int trig = (k == 0 ? 0 : 1); trig <= (k == 0 ? 0 : 2); ++trig) {
                    Sector s;
                    s.k = k;
                    s.trig = trig;
                    s.op = spec;
                    // L(alpha, 0) in sector k.
                    s.op.shift = spec.shift - (1.0 - alpha) + 0.5 * k * k;
                    HermiteExpansion e = hermite_expand(s.op, make_envelope());
                    if (k == 0) e = project(ProjectorTag::P3, e);
                    if (k == 1) e = project(ProjectorTag::P2, e);
                    s.e = std::move(e);
                    sectors.push_back(std::move(s));
                }
        }
        for (const auto& s : sectors) report.truncation_warning = report.truncation_warning || s.e.truncation_warning;

        auto weighted_sup = [&](double sigma) {
            std::vector<HermiteExpansion> ev;
            for (const auto& s : sectors) ev.push_back(sigma == 0.0 ? s.e : semigroup_apply(s.op, sigma, s.e));
            double sup = 0.0;
            std::vector<double> vals(sectors.size());
            for (int i = 0; i < opt.n_z; ++i) {
                for (std::size_t q = 0; q < sectors.size(); ++q) vals[q] = ev[q].eval_ungauged(zs[i]);
                for (int j = 0; j < (one_d ? 1 : n_theta); ++j) {
                    const double th = 2.0 * kPi * j / n_theta;
                    double f = 0.0;
                    for (std::size_t q = 0; q < sectors.size(); ++q) {
                        const auto& s = sectors[q];
                        const double tr = s.trig == 0 ? 1.0 : (s.trig == 1 ? std::cos(s.k * th) : std::sin(s.k * th));
                        f += vals[q] * tr;
                    }
                    sup = std::max(sup, wz[i] * std::abs(f));
                }
            }
            return sup;
        };
        const double n0 = weighted_sup(0.0);
        std::vector<double> ly(opt.n_sigma);
        for (int s = 0; s < opt.n_sigma; ++s) ly[s] = std::log(weighted_sup(sigmas[s]) / n0);
        // Least squares log ratio = -rate sigma + c.
        double mx = 0, my = 0;
        for (int s = 0; s < opt.n_sigma; ++s) {
            mx += sigmas[s];
            my += ly[s];
        }
        mx /= opt.n_sigma;
        my /= opt.n_sigma;
        double sxx = 0, sxy = 0;
        for (int s = 0; s < opt.n_sigma; ++s) {
            sxx += (sigmas[s] - mx) * (sigmas[s] - mx);
            sxy += (sigmas[s] - mx) * (ly[s] - my);
        }
        const double slope = sxy / sxx;
        double res = 0.0;
        for (int s = 0; s < opt.n_sigma; ++s) {
            const double d = ly[s] - (my + slope * (sigmas[s] - mx));
            res += d * d;
        }
        DecayTrial tr;
        tr.id = t;
        tr.ell = ell;
        tr.alpha = alpha;
        tr.rate = -slope;
        tr.residual = std::sqrt(res / opt.n_sigma);
        report.worst_rate = std::min(report.worst_rate, tr.rate);
        report.trials.push_back(tr);
    }
    return report;
}

void write_decay_csv(const DecayReport& r, std::ostream& os) {
    os << "trial,ell,alpha,rate,residual\n";
    for (const auto& t : r.trials)
        os << t.id << ',' << fmt_double(t.ell) << ',' << fmt_double(t.alpha) << ',' << fmt_double(t.rate) << ','
           << fmt_double(t.residual) << '\n';
}

}  // namespace neck
