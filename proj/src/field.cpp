#include "neckpinch/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "neckpinch/errors.hpp"

namespace neck {

double GraphField::min() const {
    double m = std::numeric_limits<double>::infinity();
    for (double v : values) m = std::min(m, v);
    return m;
}

double GraphField::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

GraphField GraphField::from_function(double y_max, int ny, int nth,
                                     const std::function<double(double, double)>& f) {
    GraphField g(y_max, ny, nth);
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < nth; ++j) g(i, j) = f(g.y(i), g.theta(j));
    return g;
}

static void require_same(const GraphField& a, const GraphField& b) {
    if (!a.same_grid(b)) fail(ErrorKind::InvalidArgument, "fields live on different grids");
}

GraphField operator+(const GraphField& a, const GraphField& b) {
    require_same(a, b);
    GraphField r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.values[k] += b.values[k];
    return r;
}

GraphField operator-(const GraphField& a, const GraphField& b) {
    require_same(a, b);
    GraphField r = a;
    for (std::size_t k = 0; k < r.size(); ++k) r.values[k] -= b.values[k];
    return r;
}

GraphField operator*(double s, const GraphField& a) {
    GraphField r = a;
    for (double& v : r.values) v *= s;
    return r;
}

void axpy(GraphField& a, double s, const GraphField& b) {
    require_same(a, b);
    for (std::size_t k = 0; k < a.size(); ++k) a.values[k] += s * b.values[k];
}

std::vector<double> simpson_weights(int n, double h) {
    if (n < 4) fail(ErrorKind::InvalidArgument, "simpson_weights needs at least 4 nodes");
    std::vector<double> w(n, 0.0);
    // Simpson over an even number of intervals, 3/8 rule on the leftover three.
    const int m = (n % 2 == 1) ? n : n - 3;
    for (int i = 0; i < m; ++i) {
        double c = (i == 0 || i == m - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[i] += c * h / 3.0;
    }
    if (m != n) {
        const int s = n - 4;
        const double c[4] = {1.0, 3.0, 3.0, 1.0};
        for (int k = 0; k < 4; ++k) w[s + k] += c[k] * 3.0 * h / 8.0;
    }
    return w;
}

}  // namespace neck
