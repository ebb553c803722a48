#pragma once

#include <vector>

#include "neckpinch/field.hpp"

namespace neck {

// Finite-difference weights for derivative `order` at x0 over the given nodes.
std::vector<double> fornberg_weights(double x0, const std::vector<double>& nodes, int order);

// Derivative along y on a uniform grid. Interior nodes use a centered stencil of
// accuracy `accuracy`; nodes closer to the boundary use a shifted stencil with
// order + accuracy points, so the formal order is kept everywhere.
class YStencil {
public:
    YStencil(int n, double h, int order, int accuracy = 4);

    int order() const { return order_; }
    // Applies to samples f[offset + i * stride], i = 0..n-1.
    void apply(const double* f, double* out, int stride) const;

private:
    struct Row {
        int start;
        std::vector<double> w;
        int center;
    };
    int n_;
    int order_;
    std::vector<Row> rows_;
};

// Fourier collocation derivative on a periodic grid with an even number of
// points. Odd orders drop the Nyquist mode.
class ThetaSpectral {
public:
    ThetaSpectral(int n, int order);
    void apply(const double* f, double* out) const;

private:
    int n_;
    std::vector<double> m_;
};

// Derivative caches keyed by grid geometry.
GraphField d_y(const GraphField& f, int order, int accuracy = 4);
GraphField d_theta(const GraphField& f, int order);

// Largest supported y-derivative order.
inline constexpr int kMaxYOrder = 6;

}  // namespace neck
