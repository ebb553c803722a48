#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "neckpinch/core_profile.hpp"
#include "neckpinch/decomposition.hpp"
#include "neckpinch/field.hpp"

namespace neck {

// Angular power per Fourier mode k = 0..3, integrated against mu(y) dy.
std::array<double, 4> theta_energy(const GraphField& v, const WeightedMeasure& w = {});

// Omega_{m,n} = int int v^{-2n} (d_y^m d_theta^n v)^2 mu dtheta dy for 2 <= m+n <= 5.
struct LyapunovTable {
    std::map<std::pair<int, int>, double> omega;
    double at(int m, int n) const;
};
LyapunovTable lyapunov_table(const GraphField& v, const WeightedMeasure& w = {});

// Named constants for the "up to a constant" inequalities; unknown keys are errors.
using Constants = std::map<std::string, double>;
Constants default_constants();
// Keys in the file override the defaults. Format: "key = value" lines, '#' comments.
Constants load_constants(const std::string& path);
void save_constants(const Constants& c, const std::string& path);
double constant(const Constants& c, const std::string& key);

// margin = measured / bound; a margin <= 1 means the inequality holds.
struct Margin {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    double margin = 0.0;
};

struct ConditionReport {
    std::vector<Margin> entries;

    void add(const std::string& name, double measured, double bound);
    const Margin& get(const std::string& name) const;
    bool has(const std::string& name) const;
    bool all_hold() const;
    double worst() const;
};

// Global conditions, inner-region conditions and the output bound v >= g(y, beta),
// evaluated at rescaled time tau with rate parameter a.
ConditionReport condition_check(const GraphField& v, double tau, double a,
                                const Constants& c = default_constants());

// Parameter history point at one refit or sample time.
struct ParamPoint {
    double tau = 0.0;
    double a = 0.5;
    double b = 0.0;
    double beta0 = 0.0;
};

struct OdeResidual {
    double tau = 0.0;
    double gamma1 = 0.0;  // b + 4a - 2 - a_tau / (1 - a)
    double gamma2 = 0.0;  // b^2 + b_tau
    double beta0_residual = 0.0;  // d_tau beta0 - Omega1(a, b) beta0
    double omega1 = 0.0;
};

double omega1(double a, double b);
// Centered three-point derivatives; endpoints are skipped.
std::vector<OdeResidual> ode_residuals(const std::vector<ParamPoint>& history);

struct LawPoint {
    double t = 0.0;
    double lambda = 0.0;
    double b = 0.0;
};

struct FitResult {
    double T_hat = 0.0;
    std::size_t n_used = 0;
    // lambda / sqrt(T - t) and b log(1/(T - t)) over the final decade of T - t.
    double lambda_ratio_mean = 0.0, lambda_ratio_min = 0.0, lambda_ratio_max = 0.0;
    double b_ratio_mean = 0.0, b_ratio_min = 0.0, b_ratio_max = 0.0;
    // log lambda = slope log(T - t) + intercept, expected slope 1/2.
    double lambda_slope = 0.0, lambda_intercept = 0.0, lambda_r2 = 0.0;
    // log b = slope log log(1/(T - t)) + intercept, expected slope -1.
    double b_slope = 0.0, b_intercept = 0.0, b_r2 = 0.0;
};

FitResult asymptotic_fit(const std::vector<LawPoint>& history, double T_hat,
                         std::size_t min_points = 10);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Running maxima along a trajectory. Keys of M_mn are "3,0", "11/10,0", "2,1", "1,1".
struct Majorants {
    std::map<std::string, double> M_mn{{"3,0", 0.0}, {"11/10,0", 0.0}, {"2,1", 0.0}, {"1,1", 0.0}};
    double A = 0.0;
    double B = 0.0;
    double M4 = 0.0;

    // phi is the remainder of the decomposition at time tau.
    void update(double tau, const GraphField& phi, double a, double b, const BetaClock& clock = {});
};

}  // namespace neck
