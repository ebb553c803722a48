#pragma once

#include <array>
#include <complex>
#include <utility>
#include <vector>

#include "neckpinch/core_profile.hpp"
#include "neckpinch/field.hpp"
#include "neckpinch/surface_graph.hpp"

namespace neck {

// (a, b, beta0..beta4) of v = V_{a,b} + beta0 y + beta1 cos + beta2 sin + beta3 y cos
// + beta4 y sin + phi.
struct ProfileParams {
    double a = 0.5;
    double b = 0.0;
    std::array<double, 5> beta{};
};

// V_{a,b} without the constructor checks; Newton iterates may step slightly
// outside the admissible set.
double profile_raw(double a, double b, double y);
// beta0 y + beta1 cos + beta2 sin + beta3 y cos + beta4 y sin.
double beta_terms(const std::array<double, 5>& beta, double y, double theta);
GraphField model_field(const GraphField& like, const ProfileParams& p);

enum class FitMode { Interior, Optimal };

// {1, y, y^2 - 1/a, cos, sin, y cos, y sin} on the grid.
struct ModeBasis {
    double a = 0.5;
    std::array<GraphField, 7> modes;
    std::array<double, 7> norms2{};

    static ModeBasis build(const GraphField& like, double a);
};

// Quadrature weights: Simpson in y, trapezoid in theta, times exp(-a y^2 / 2).
std::vector<double> gaussian_weights(const GraphField& like, double a);
double weighted_inner(const GraphField& f, const GraphField& g, double a);
// Unweighted L^2 inner product with the same quadrature.
double plain_inner(const GraphField& f, const GraphField& g);

struct Decomposition {
    ProfileParams params;
    GraphField phi;
    GraphField w;
    GraphField xi;
    // Projection coefficients <phi, e_i>_a / <e_i, e_i>_a.
    std::array<double, 7> ortho_residuals{};
    // <e^{-a y^2/4} xi, {1, y, y^2, cos, sin, y cos, y sin}> in plain L^2, scaled the same way.
    std::array<double, 7> xi_residuals{};
    int iterations = 0;
    double jacobian_condition = 0.0;
};

struct FitOptions {
    int max_iterations = 30;
    double basin = 0.5;
    double tolerance = 1e-14;
    double fd_step = 1e-7;
};

Decomposition fit_parameters(const GraphField& v, double a_prev, FitMode mode = FitMode::Interior,
                             const FitOptions& opt = {});
Decomposition fit_parameters(const GraphField& v, const ProfileParams& guess,
                             const FitOptions& opt = {});

struct GaugeFields {
    GraphField w;
    GraphField xi;
    std::array<double, 7> ortho{};
};
GaugeFields gauge_fields(const GraphField& v, const ProfileParams& p);

struct OptimalOptions {
    int max_iterations = 30;
    double tolerance = 1e-12;
    double fd_step = 1e-6;
    double max_rotation = 0.2;
    double max_translation = 2.0;
};

struct OptimalResult {
    Frame frame;
    RigidMotion motion;  // in units of the incoming blow-up variables
    double scale = 1.0;  // lambda_opt / lambda
    double lambda_opt = 1.0;
    double b_opt = 0.0;
    GraphField v;  // graph in the optimal frame and scale
    Decomposition dec;
    int iterations = 0;
};

OptimalResult optimal_refit(const GraphField& v, const Frame& frame, double lambda,
                            const OptimalOptions& opt = {});

// One decomposed sample along a trajectory. a_dyn is the rescaling rate used by
// the integrator at that time; segment changes whenever the frame is re-gauged.
struct XiSample {
    double tau = 0.0;
    GraphField v;
    ProfileParams params;
    int segment = 0;
};

struct XiTerms {
    GraphField dxi_dtau;
    GraphField linear;  // -L(a,b) xi
    GraphField F1, F2, N1, N2, N3;
    GraphField residual;
};

struct XiResidual {
    double sup = 0.0;
    // sup over the inner region of <y>^{-3} e^{a y^2/4} |residual|
    double inner_weighted = 0.0;
    XiTerms terms;
};

// Three-point derivative in tau evaluated at window[at]; at = 1 is the centered stencil.
XiResidual xi_evolution_residual(const std::vector<XiSample>& window, double kappa0 = 10.0, int at = 1);

// Right side of the xi equation given parameter rates.
XiTerms xi_rhs_terms(const GraphField& v, const ProfileParams& p, double a_tau, double b_tau,
                     const std::array<double, 5>& beta_tau);

// f_+(y) = (1/2pi) int f e^{-i theta} dtheta and f_- = conj(f_+).
std::pair<std::vector<std::complex<double>>, std::vector<std::complex<double>>> fourier_pm(
    const GraphField& f);

}  // namespace neck
