#pragma once

#include <cmath>

namespace neck {

struct GraphField;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;

// V_{r,s}(y) = sqrt((2 + s y^2) / (2 - 2r)); 0 <= r < 1, s >= 0.
struct FormalProfile {
    double r = 0.5;
    double s = 0.0;

    FormalProfile() = default;
    FormalProfile(double r_, double s_);

    double value(double y) const;
    double dy(double y) const;
    double dyy(double y) const;
    double dyyy(double y) const;
};

double profile_value(const FormalProfile& p, double y);

// 0.5 y V' - 0.5 V + 1/V evaluated for V = V_{r,s}.
double adiabatic_residual_at(const FormalProfile& p, double y);
double adiabatic_residual(double s, double y);

// Coefficients of the quasilinear operator, index 1..4.
double coefficient_F(int index, double p, double q);

struct WeightedMeasure {
    double M = 100.0;
};
double mu_weight(const WeightedMeasure& w, double y);

struct BetaClock {
    double kappa0 = 10.0;
};
double beta_of_tau(const BetaClock& c, double tau);

struct StepProfile {
    double threshold = 20.0;
    double inner_value = 19.0 * kSqrt2 / 20.0;
    double outer_value = 4.0;
};
double g_step(double y, double s, const StepProfile& g = StepProfile{});

// sup over the grid of (1+y^2)^{-m/2} |d_y^n f|; n <= 6.
double weighted_norm(const GraphField& f, double m, int n);

inline double japanese(double y) { return std::sqrt(1.0 + y * y); }

}  // namespace neck
