#include "neckpinch/derivatives.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "neckpinch/errors.hpp"

namespace neck {

std::vector<double> fornberg_weights(double x0, const std::vector<double>& x, int m) {
    const int n = static_cast<int>(x.size()) - 1;
    std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n + 1);
    for (int i = 0; i <= n; ++i) w[i] = c[i][m];
    return w;
}

YStencil::YStencil(int n, double h, int order, int accuracy) : n_(n), order_(order) {
    if (order < 1 || order > kMaxYOrder)
        fail(ErrorKind::InvalidArgument, "unsupported y-derivative order " + std::to_string(order));
    const int half = (order + accuracy - 1) / 2;
    const int wide = order + accuracy;
    if (n < wide + 1) fail(ErrorKind::InvalidArgument, "grid too small for stencil");
    rows_.resize(n);
    for (int i = 0; i < n; ++i) {
        Row r;
        int len;
        if (i - half >= 0 && i + half <= n - 1) {
            r.start = i - half;
            len = 2 * half + 1;
        } else {
            len = wide;
            r.start = (i - half < 0) ? 0 : n - len;
        }
        std::vector<double> nodes(len);
        for (int k = 0; k < len; ++k) nodes[k] = (r.start + k - i) * h;
        r.w = fornberg_weights(0.0, nodes, order);
        r.center = i - r.start;
        rows_[i] = std::move(r);
    }
}

void YStencil::apply(const double* f, double* out, int stride) const {
    // Differences against the center value make constants differentiate to exactly 0.
    for (int i = 0; i < n_; ++i) {
        const Row& r = rows_[i];
        const double fc = f[static_cast<std::ptrdiff_t>(i) * stride];
        double acc = 0.0;
        for (std::size_t k = 0; k < r.w.size(); ++k)
            acc += r.w[k] * (f[static_cast<std::ptrdiff_t>(r.start + static_cast<int>(k)) * stride] - fc);
        out[static_cast<std::ptrdiff_t>(i) * stride] = acc;
    }
}

ThetaSpectral::ThetaSpectral(int n, int order) : n_(n), m_(static_cast<std::size_t>(n) * n, 0.0) {
    if (n % 2 != 0) fail(ErrorKind::InvalidArgument, "theta grid size must be even");
    // Column j is the derivative of the cardinal function centered at node j.
    const int kmax = n / 2;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double d = 2.0 * kPi * (i - j) / n;
            double s = 0.0;
            for (int k = 1; k <= kmax; ++k) {
                const double weight = (k == kmax) ? 1.0 : 2.0;
                const double kp = std::pow(static_cast<double>(k), order);
                double term;
                switch (order % 4) {
                    case 0: term = kp * std::cos(k * d); break;
                    case 1: term = -kp * std::sin(k * d); break;
                    case 2: term = -kp * std::cos(k * d); break;
                    default: term = kp * std::sin(k * d); break;
                }
                if (k == kmax && order % 2 == 1) term = 0.0;
                s += weight * term;
            }
            m_[static_cast<std::size_t>(i) * n + j] = s / n;
        }
    }
}

void ThetaSpectral::apply(const double* f, double* out) const {
    const double f0 = f[0];
    for (int i = 0; i < n_; ++i) {
        const double* row = &m_[static_cast<std::size_t>(i) * n_];
        double acc = 0.0;
        for (int j = 1; j < n_; ++j) acc += row[j] * (f[j] - f0);
        out[i] = acc;
    }
}

namespace {

std::mutex cache_mutex;

const YStencil& y_stencil(int n, double h, int order, int accuracy) {
    static std::map<std::tuple<int, double, int, int>, std::unique_ptr<YStencil>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_tuple(n, h, order, accuracy);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<YStencil>(n, h, order, accuracy)).first;
    return *it->second;
}

const ThetaSpectral& theta_op(int n, int order) {
    static std::map<std::pair<int, int>, std::unique_ptr<ThetaSpectral>> cache;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto key = std::make_pair(n, order);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<ThetaSpectral>(n, order)).first;
    return *it->second;
}

}  // namespace

GraphField d_y(const GraphField& f, int order, int accuracy) {
    const YStencil& s = y_stencil(f.ny, f.dy(), order, accuracy);
    GraphField out = f.like();
    for (int j = 0; j < f.nth; ++j) s.apply(&f.values[j], &out.values[j], f.nth);
    return out;
}

GraphField d_theta(const GraphField& f, int order) {
    GraphField out = f.like();
    if (order == 0) return f;
    const ThetaSpectral& s = theta_op(f.nth, order);
    for (int i = 0; i < f.ny; ++i)
        s.apply(&f.values[static_cast<std::size_t>(i) * f.nth],
                &out.values[static_cast<std::size_t>(i) * f.nth]);
    return out;
}

}  // namespace neck
