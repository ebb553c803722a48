#pragma once

#include <vector>

#include "neckpinch/diagnostics.hpp"
#include "neckpinch/field.hpp"

namespace neck {

// amplitude * (cos or sin)(k theta) * exp(-x^2 / (2 width^2)), k >= 2.
struct HigherMode {
    int k = 2;
    double amplitude = 0.0;
    double width = 1.0;
    bool sine = false;
};

struct PerturbationSpec {
    double b0 = 0.1;
    double a0 = 0.5;
    double eps0 = 0.0;  // axial asymmetry x e^{-x^2/4}
    double eps1 = 0.0;  // transverse shifts e^{-x^2/4} (cos, sin)
    double eps2 = 0.0;
    double eps3 = 0.0;  // tilts x e^{-x^2/4} (cos, sin)
    double eps4 = 0.0;
    std::vector<HigherMode> higher;

    void validate() const;
};

// Requires b0 y_max^2 >= 20 so the grid covers the inner region.
GraphField build_initial(const PerturbationSpec& spec, double y_max, int ny, int nth);

// Margins for every inequality of the initial-data assumptions. |f_pm| denotes
// |f_+| + |f_-|, so a single cos mode of amplitude e contributes e.
ConditionReport assumption_check(const GraphField& u0, const PerturbationSpec& spec,
                                 const Constants& c = default_constants());

}  // namespace neck
