// Derives the golden inequality constants from the benchmark and tilted runs.
// Usage: calibrate_constants [output path]   (prints the table; writes the file if a path is given)
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>

#include "neckpinch/diagnostics.hpp"
#include "neckpinch/flow_solver.hpp"
#include "neckpinch/initial_data.hpp"

using namespace neck;

namespace {

constexpr double kSafety = 2.0;

// Condition name -> constant key, for conditions whose bound is a free multiplicative constant.
std::string key_for(const std::string& condition, const Constants& c) {
    if (condition == "C0i_upper") return "C_star";
    const std::string key = condition.rfind("out_", 0) == 0 ? "Cout_" + condition.substr(4) : condition;
    return c.count(key) ? key : "";
}

double round_up_2sig(double x) {
    const double scale = std::pow(10.0, std::floor(std::log10(x)) - 1.0);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2g", std::ceil(x / scale) * scale);
    return std::strtod(buf, nullptr);
}

}  // namespace

int main(int argc, char** argv) {
    Constants unit = default_constants();
    for (auto& [k, v] : unit)
        if (k.rfind("C", 0) == 0) v = 1.0;

    std::map<std::string, double> need;
    std::map<std::string, double> structural;
    for (double eps : {0.0, 0.01}) {
        SolverConfig c;
        c.tau_max = 50.0;
        c.lambda_min = 0.05;
        c.keep_snapshots = true;
        PerturbationSpec p;
        p.b0 = 0.1;
        p.eps3 = eps;
        p.eps1 = eps;
        const Trajectory tr = run(build_initial(p, c.y_max, c.ny, c.nth), Frame{}, c);
        std::fprintf(stderr, "eps %g: %zu snapshots to tau %.3f\n", eps, tr.snapshots.size(), tr.final_state.tau);
        for (const Snapshot& s : tr.snapshots) {
            for (const Margin& m : condition_check(s.v, s.tau, s.a_dyn, unit).entries) {
                const std::string key = key_for(m.name, unit);
                auto& slot = key.empty() ? structural[m.name] : need[key];
                slot = std::max(slot, m.margin);
            }
        }
    }

    Constants golden = default_constants();
    std::printf("%-20s %12s %12s\n", "constant", "required", "golden");
    for (const auto& [k, req] : need) {
        if (req > 0.0) golden[k] = round_up_2sig(kSafety * req);
        std::printf("%-20s %12.4g %12.4g\n", k.c_str(), req, golden[k]);
    }
    std::printf("\n%-20s %12s\n", "fixed-bound check", "worst margin");
    for (const auto& [k, m] : structural) std::printf("%-20s %12.4g\n", k.c_str(), m);

    if (argc > 1) save_constants(golden, argv[1]);
    return 0;
}
