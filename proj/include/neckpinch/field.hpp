#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "neckpinch/core_profile.hpp"

namespace neck {

// Samples on a uniform y grid over [-y_max, y_max] (endpoints included) times a
// periodic theta grid over [0, 2pi) (right endpoint excluded). Row-major: the
// theta index is fastest.
struct GraphField {
    double y_max = 16.0;
    int ny = 0;
    int nth = 0;
    std::vector<double> values;

    GraphField() = default;
    GraphField(double y_max_, int ny_, int nth_, double fill = 0.0)
        : y_max(y_max_), ny(ny_), nth(nth_),
          values(static_cast<std::size_t>(ny_) * static_cast<std::size_t>(nth_), fill) {}

    double dy() const { return 2.0 * y_max / (ny - 1); }
    double dth() const { return 2.0 * kPi / nth; }
    double y(int i) const { return -y_max + i * dy(); }
    double theta(int j) const { return j * dth(); }
    std::size_t size() const { return values.size(); }

    double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * nth + j]; }
    double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * nth + j]; }

    bool same_grid(const GraphField& o) const {
        return ny == o.ny && nth == o.nth && y_max == o.y_max;
    }
    GraphField like(double fill = 0.0) const { return GraphField(y_max, ny, nth, fill); }

    double min() const;
    double max_abs() const;

    static GraphField from_function(double y_max, int ny, int nth,
                                    const std::function<double(double, double)>& f);
};

GraphField operator+(const GraphField& a, const GraphField& b);
GraphField operator-(const GraphField& a, const GraphField& b);
GraphField operator*(double s, const GraphField& a);
// a + s b
void axpy(GraphField& a, double s, const GraphField& b);

// Composite Simpson weights on n equally spaced nodes with spacing h. For even n
// the last interval is closed with a 3/8 rule on the final four nodes.
std::vector<double> simpson_weights(int n, double h);

}  // namespace neck
