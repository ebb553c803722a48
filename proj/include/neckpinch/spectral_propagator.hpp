#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "neckpinch/field.hpp"

namespace neck {

// Distinct eigenvalue of L(a, 0) with its multiplicity (cos and sin counted for k >= 1).
struct SpectrumEntry {
    double value = 0.0;
    int multiplicity = 0;
};

// Analytic table a(j - 2) + a k^2 over 0 <= j <= j_max, 0 <= k <= k_max, sorted.
std::vector<SpectrumEntry> spectrum_L(double a, int j_max, int k_max);

// Lowest eigenvalues (with multiplicity) of
// L(a,b) = -d_y^2 + a^2 y^2/4 - 3a/2 - (2-2a)/(2+b y^2) - (1/2) d_theta^2
// truncated to n_h Hermite functions per Fourier sector |k| <= k_max.
std::vector<double> truncated_L_eigenvalues(double a, double b, int n_h, int k_max, int count);

// Gauss-Hermite rule for the weight e^{-x^2} (Golub-Welsch).
void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights);

// Orthonormal Hermite polynomials h_0..h_{n-1} for the weight e^{-x^2} at x.
void hermite_orthonormal(int n, double x, double* out);

struct OscillatorSpec {
    double alpha = 0.5;
    int n_h = 64;
    // L0 = -d_z^2 + alpha^2 z^2/4 - 3 alpha/2 + shift.
    double shift = 0.0;

    void validate() const;
    double eigenvalue(int n) const { return alpha * (n - 1) + shift; }
};

struct Eigenpair {
    double value = 0.0;
    // Samples of the L^2-normalized eigenfunction.
    std::function<double(double)> f;
};
std::vector<Eigenpair> oscillator_eigens(const OscillatorSpec& spec, int count);

// Coefficients c_n = <f, psi_n> in the orthonormal eigenbasis psi_n of L0(alpha).
// Functions are passed in ungauged form u(z) = e^{alpha z^2/4} f(z).
struct HermiteExpansion {
    double alpha = 0.5;
    std::vector<double> c;
    bool truncation_warning = false;

    double eval(double z) const;           // f(z)
    double eval_ungauged(double z) const;  // e^{alpha z^2/4} f(z)
};

HermiteExpansion hermite_expand(const OscillatorSpec& spec, const std::function<double(double)>& u);

// e^{-sigma L0} by coefficient damping.
HermiteExpansion semigroup_apply(const OscillatorSpec& spec, double sigma, const HermiteExpansion& f);

// Cross-check: e^{-sigma L0} f at z by quadrature of the Mehler kernel, normalized
// so that eigenfunctions are reproduced exactly. f is given directly (gauged).
double semigroup_kernel_apply(const OscillatorSpec& spec, double sigma,
                              const std::function<double(double)>& f, double z);

enum class ProjectorTag { P1, P2, P3, P7 };
ProjectorTag projector_from_string(const std::string& s);

// Removes the lowest 1, 2 or 3 Hermite coefficients.
HermiteExpansion project(ProjectorTag tag, const HermiteExpansion& f);

// Grid version on a uniform z grid with Simpson quadrature: orthogonal complement of
// span{1, z, z^2}[:rank] e^{-alpha z^2/4} in plain L^2. P7 acts on 2-D fields where
// y is z: P3 on the theta mean, P2 on the cos and sin sectors, identity elsewhere.
std::vector<double> project_samples(ProjectorTag tag, double alpha, double z_max,
                                    const std::vector<double>& f);
GraphField project_field(ProjectorTag tag, double alpha, const GraphField& f);

struct DecayTrial {
    int id = 0;
    double ell = 5.0;
    double alpha = 0.5;
    double rate = 0.0;
    double residual = 0.0;
};

struct DecayReport {
    std::vector<DecayTrial> trials;
    double worst_rate = 0.0;
    bool truncation_warning = false;
};

struct DecayOptions {
    double sigma_min = 0.5;
    double sigma_max = 4.0;
    int n_sigma = 15;
    double z_window = 12.0;
    int n_z = 481;
};

// ell = 5: two-dimensional trials in Fourier sectors |k| <= 3 projected by P7, evolved by
// L(alpha, 0) sector by sector. ell = 11/10: theta-independent trials projected by P2,
// evolved by L0(alpha). Rates come from a least-squares fit of log(weighted sup) vs sigma.
DecayReport propagator_decay_experiment(const OscillatorSpec& spec, double ell, int trials,
                                        std::uint64_t seed, const DecayOptions& opt = {});

void write_decay_csv(const DecayReport& r, std::ostream& os);

}  // namespace neck
