#include "neckpinch/core_profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "neckpinch/derivatives.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/field.hpp"

namespace neck {

FormalProfile::FormalProfile(double r_, double s_) : r(r_), s(s_) {
    if (!(r_ < 1.0) || !(r_ >= 0.0))
        fail(ErrorKind::InvalidArgument, "profile shape parameter r must lie in [0,1), got " +
                                             std::to_string(r_));
    if (!(s_ >= 0.0))
        fail(ErrorKind::InvalidArgument, "profile neck parameter s must be >= 0, got " +
                                             std::to_string(s_));
}

double FormalProfile::value(double y) const {
    return std::sqrt((2.0 + s * y * y) / (2.0 - 2.0 * r));
}

// From V^2 = (2 + s y^2)/c: V V' = s y / c, V'^2 + V V'' = s / c, V''' = -3 V' V'' / V.
double FormalProfile::dy(double y) const {
    const double c = 2.0 - 2.0 * r;
    return s * y / (c * value(y));
}

double FormalProfile::dyy(double y) const {
    const double c = 2.0 - 2.0 * r;
    const double v = value(y);
    const double v1 = s * y / (c * v);
    return (s / c - v1 * v1) / v;
}

double FormalProfile::dyyy(double y) const {
    const double v = value(y);
    return -3.0 * dy(y) * dyy(y) / v;
}

double profile_value(const FormalProfile& p, double y) {
    return FormalProfile(p.r, p.s).value(y);
}

double adiabatic_residual_at(const FormalProfile& p, double y) {
    const double v = p.value(y);
    return 0.5 * y * p.dy(y) - 0.5 * v + 1.0 / v;
}

double adiabatic_residual(double s, double y) {
    return adiabatic_residual_at(FormalProfile(0.5, s), y);
}

double coefficient_F(int index, double p, double q) {
    const double d = 1.0 + p * p + q * q;
    switch (index) {
        case 1: return (1.0 + q * q) / d;
        case 2: return (1.0 + p * p) / d;
        case 3: return -2.0 * p * q / d;
        case 4: return q / d;
        default: break;
    }
    fail(ErrorKind::InvalidArgument, "coefficient index must be 1..4");
}

double mu_weight(const WeightedMeasure& w, double y) {
    return std::pow(w.M + y * y, -0.6);
}

double beta_of_tau(const BetaClock& c, double tau) { return 1.0 / (c.kappa0 + tau); }

double g_step(double y, double s, const StepProfile& g) {
    return s * y * y < g.threshold ? g.inner_value : g.outer_value;
}

double weighted_norm(const GraphField& f, double m, int n) {
    if (n < 0 || n > kMaxYOrder)
        fail(ErrorKind::InvalidArgument,
             "weighted_norm: derivative order " + std::to_string(n) + " exceeds stencil support");
    const GraphField d = n == 0 ? f : d_y(f, n);
    double sup = 0.0;
    for (int i = 0; i < f.ny; ++i) {
        const double w = std::pow(1.0 + f.y(i) * f.y(i), -0.5 * m);
        for (int j = 0; j < f.nth; ++j) sup = std::max(sup, w * std::abs(d(i, j)));
    }
    return sup;
}

}  // namespace neck
