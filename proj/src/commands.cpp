#include "neckpinch/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "neckpinch/diagnostics.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/initial_data.hpp"
#include "neckpinch/numfmt.hpp"
#include "neckpinch/spectral_propagator.hpp"
#include "neckpinch/surface_graph.hpp"

namespace neck {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string resolve_output_dir(const std::string& flag, const RunConfig& cfg) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("NECKPINCH_OUT"); env && *env) return env;
    return cfg.output_dir;
}

namespace {

void ensure_dir(const std::string& d) {
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + d + ": " + ec.message());
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
    std::ofstream os(fs::path(dir) / name, std::ios::binary);
    if (!os) fail(ErrorKind::Io, "cannot write " + (fs::path(dir) / name).string());
    return os;
}

void write_json(const std::string& dir, const std::string& name, const json& j) {
    auto os = open_out(dir, name);
    os << j.dump(2) << '\n';
}

Constants constants_for(const RunConfig& cfg) {
    return cfg.constants_file.empty() ? default_constants() : load_constants(cfg.constants_file);
}

json params_json(const ProfileParams& p) {
    return json{{"a", p.a}, {"b", p.b}, {"beta", {p.beta[0], p.beta[1], p.beta[2], p.beta[3], p.beta[4]}}};
}

json frame_json(const Frame& f) {
    const Eigen::Vector4d q = quaternion_of(f.axes);
    return json{{"quaternion", {q[0], q[1], q[2], q[3]}}, {"translation", {f.origin[0], f.origin[1], f.origin[2]}}};
}

json report_json(const ConditionReport& r) {
    json j = json::array();
    for (const auto& e : r.entries)
        j.push_back({{"name", e.name}, {"measured", e.measured}, {"bound", e.bound}, {"margin", e.margin}});
    return j;
}

json lyapunov_json(const LyapunovTable& t) {
    json j = json::object();
    for (const auto& [mn, v] : t.omega) j[std::to_string(mn.first) + "," + std::to_string(mn.second)] = v;
    return j;
}

template <class F>
int guarded(const std::string& out_dir, std::ostream& log, F&& body) {
    try {
        ensure_dir(out_dir);
        return body();
    } catch (const Error& e) {
        log << "error [" << error_kind_name(e.kind()) << "]: " << e.what() << '\n';
        try {
            ensure_dir(out_dir);
            write_json(out_dir, "error.json", json{{"kind", error_kind_name(e.kind())}, {"message", e.what()}});
        } catch (...) {
        }
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        try {
            write_json(out_dir, "error.json", json{{"kind", "Internal"}, {"message", e.what()}});
        } catch (...) {
        }
        return 3;
    }
}

std::string csv(double x) { return fmt_double(x); }

}  // namespace

void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
    os << kTrajectoryHeader << '\n';
    for (const auto& s : tr.samples) {
        os << csv(s.t) << ',' << csv(s.tau) << ',' << csv(s.lambda) << ',' << csv(s.params.a) << ','
           << csv(s.params.b);
        for (double b : s.params.beta) os << ',' << csv(b);
        os << ',' << csv(s.vmin) << ',' << csv(s.T_hat) << '\n';
    }
}

std::string decomposition_record(const Decomposition& d, const Frame& frame) {
    json j = params_json(d.params);
    j["ortho_residuals"] = d.ortho_residuals;
    j["xi_residuals"] = d.xi_residuals;
    j["iterations"] = d.iterations;
    j["jacobian_condition"] = d.jacobian_condition;
    j["frame"] = frame_json(frame);
    return j.dump();
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    return guarded(out_dir, log, [&]() {
        const Constants consts = constants_for(cfg);
        const GraphField u0 =
            build_initial(cfg.perturbation, cfg.solver.y_max, cfg.solver.ny, cfg.solver.nth);
        {
            auto os = open_out(out_dir, "config.txt");
            os << serialize_config(cfg);
        }
        const Trajectory tr = run(u0, Frame{}, cfg.solver);
        log << "simulate: " << tr.samples.size() << " samples, " << tr.refits.size() << " refits, stop="
            << tr.stop_reason << '\n';
        {
            auto os = open_out(out_dir, "trajectory.csv");
            write_trajectory_csv(tr, os);
        }
        {
            auto os = open_out(out_dir, "samples.csv");
            os << "tau,a_dyn,segment,E0,E1,E2,E3\n";
            for (const auto& s : tr.samples)
                os << csv(s.tau) << ',' << csv(s.a_dyn) << ',' << s.segment << ',' << csv(s.theta_energy[0]) << ','
                   << csv(s.theta_energy[1]) << ',' << csv(s.theta_energy[2]) << ',' << csv(s.theta_energy[3])
                   << '\n';
        }
        {
            auto os = open_out(out_dir, "refits.csv");
            os << "tau,t,lambda_before,lambda_after,optimal,b_opt,a,b,beta0,beta1,beta2,beta3,beta4,"
                  "rotation,translation,theta_energy_k_nonzero,segment\n";
            for (const auto& r : tr.refits) {
                os << csv(r.tau) << ',' << csv(r.t) << ',' << csv(r.lambda_before) << ',' << csv(r.lambda_after)
                   << ',' << (r.optimal ? 1 : 0) << ',' << csv(r.b_opt) << ',' << csv(r.interior.a) << ','
                   << csv(r.interior.b);
                for (double b : r.interior.beta) os << ',' << csv(b);
                os << ',' << csv(r.motion.rotation_size()) << ',' << csv(r.motion.phi.norm()) << ','
                   << csv(r.theta_energy_k_nonzero) << ',' << r.segment << '\n';
            }
        }
        {
            auto os = open_out(out_dir, "decompositions.jsonl");
            for (const auto& r : tr.refits) {
                json j = params_json(r.interior);
                j["tau"] = r.tau;
                j["optimal"] = r.optimal;
                j["b_opt"] = r.b_opt;
                j["ortho_residuals"] = r.residuals;
                j["frame"] = frame_json(r.frame);
                os << j.dump() << '\n';
            }
        }
        if (!tr.snapshots.empty()) {
            const std::string sdir = (fs::path(out_dir) / "snapshots").string();
            ensure_dir(sdir);
            for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
                std::ostringstream name;
                name << "snap_" << std::setw(5) << std::setfill('0') << k << ".npgf";
                write_graph_binary_file(tr.snapshots[k].v, (fs::path(sdir) / name.str()).string());
            }
        }
        write_graph_binary_file(tr.final_state.v, (fs::path(out_dir) / "final.npgf").string());

        json rep;
        rep["stop_reason"] = tr.stop_reason;
        rep["steps"] = tr.steps;
        rep["final"] = {{"tau", tr.final_state.tau},
                        {"t", tr.final_state.t},
                        {"lambda", tr.final_state.lambda},
                        {"a", tr.final_state.a},
                        {"T_hat", estimate_T(tr.final_state)},
                        {"frame", frame_json(tr.final_state.frame)}};
        rep["initial_conditions"] = report_json(condition_check(u0, 0.0, tr.samples.front().params.a, consts));
        rep["final_conditions"] =
            report_json(condition_check(tr.final_state.v, tr.final_state.tau, tr.final_state.a, consts));
        rep["final_lyapunov"] = lyapunov_json(lyapunov_table(tr.final_state.v));
        if (!tr.snapshots.empty()) {
            json series = json::array();
            Majorants maj;
            const BetaClock clock{constant(consts, "kappa0")};
            for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
                const Snapshot& s = tr.snapshots[k];
                const Decomposition d = fit_parameters(s.v, tr.samples[k].params);
                maj.update(s.tau, d.phi, d.params.a, d.params.b, clock);
                if (k % cfg.diagnostic_every == 0)
                    series.push_back({{"tau", s.tau}, {"conditions", report_json(condition_check(s.v, s.tau, s.a_dyn, consts))}});
            }
            rep["condition_series"] = series;
            rep["majorants"] = {{"M_mn", maj.M_mn}, {"A", maj.A}, {"B", maj.B}, {"M4", maj.M4}};
        }
        if (tr.samples.size() >= 3) {
            std::vector<ParamPoint> hist;
            for (const auto& s : tr.samples) hist.push_back({s.tau, s.params.a, s.params.b, s.params.beta[0]});
            json od = json::array();
            for (const auto& r : ode_residuals(hist))
                od.push_back({{"tau", r.tau}, {"gamma1", r.gamma1}, {"gamma2", r.gamma2},
                              {"beta0_residual", r.beta0_residual}, {"omega1", r.omega1}});
            rep["ode_residuals"] = od;
        }
        std::vector<LawPoint> laws;
        for (const auto& r : tr.refits)
            if (r.optimal) laws.push_back({r.t, r.lambda_after, r.b_opt});
        if (laws.size() >= 10 && tr.stop_reason == "lambda_min") {
            const FitResult f = asymptotic_fit(laws, estimate_T(tr.final_state));
            rep["asymptotic_fit"] = {{"T_hat", f.T_hat},
                                     {"n_used", f.n_used},
                                     {"lambda_ratio", {f.lambda_ratio_min, f.lambda_ratio_mean, f.lambda_ratio_max}},
                                     {"b_ratio", {f.b_ratio_min, f.b_ratio_mean, f.b_ratio_max}},
                                     {"lambda_slope", f.lambda_slope},
                                     {"b_slope", f.b_slope}};
        }
        write_json(out_dir, "report.json", rep);
        return 0;
    });
}

int cmd_decompose(const std::string& snapshot, const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    (void)cfg;
    return guarded(out_dir, log, [&]() {
        if (snapshot.empty()) fail(ErrorKind::InvalidArgument, "decompose needs --snapshot");
        const GraphField v = read_graph_binary_file(snapshot);
        const Decomposition d = fit_parameters(v, 0.5);
        const std::string rec = decomposition_record(d, Frame{});
        auto os = open_out(out_dir, "decomposition.json");
        os << rec << '\n';
        log << rec << '\n';
        return 0;
    });
}

int cmd_spectrum(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    return guarded(out_dir, log, [&]() {
        const double a = cfg.spectrum_a;
        const auto table = spectrum_L(a, 4, 3);
        auto os = open_out(out_dir, "spectrum.csv");
        os << "eigenvalue,multiplicity\n";
        log << "eigenvalue multiplicity\n";
        for (const auto& e : table) {
            os << csv(e.value) << ',' << e.multiplicity << '\n';
            log << csv(e.value) << ' ' << e.multiplicity << '\n';
        }
        const auto num = truncated_L_eigenvalues(a, 0.0, cfg.propagator.n_h, 3, 7);
        auto os2 = open_out(out_dir, "spectrum_truncated.csv");
        os2 << "index,eigenvalue\n";
        for (std::size_t i = 0; i < num.size(); ++i) os2 << i << ',' << csv(num[i]) << '\n';
        return 0;
    });
}

int cmd_propagator_test(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    return guarded(out_dir, log, [&]() {
        OscillatorSpec spec;
        spec.alpha = cfg.propagator.alpha;
        spec.n_h = cfg.propagator.n_h;
        const DecayReport r5 = propagator_decay_experiment(spec, 5.0, cfg.propagator.trials, cfg.seed);
        const DecayReport r11 = propagator_decay_experiment(spec, 1.1, cfg.propagator.trials, cfg.seed + 1);
        {
            auto os = open_out(out_dir, "decay.csv");
            DecayReport all = r5;
            all.trials.insert(all.trials.end(), r11.trials.begin(), r11.trials.end());
            write_decay_csv(all, os);
        }
        const double th5 = 0.9 * spec.alpha, th11 = 0.9 * spec.alpha / 10.0;
        const bool ok5 = r5.worst_rate >= th5, ok11 = r11.worst_rate >= th11;
        log << (ok5 ? "PASS" : "FAIL") << " ell=5 worst rate " << csv(r5.worst_rate) << " >= " << csv(th5) << '\n';
        log << (ok11 ? "PASS" : "FAIL") << " ell=11/10 worst rate " << csv(r11.worst_rate) << " >= " << csv(th11)
            << '\n';
        if (r5.truncation_warning || r11.truncation_warning) log << "warning: Hermite truncation tail above 1e-10\n";
        return ok5 && ok11 ? 0 : 1;
    });
}

int cmd_check_assumptions(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    return guarded(out_dir, log, [&]() {
        const GraphField u0 =
            build_initial(cfg.perturbation, cfg.solver.y_max, cfg.solver.ny, cfg.solver.nth);
        const ConditionReport r = assumption_check(u0, cfg.perturbation, constants_for(cfg));
        write_json(out_dir, "assumptions.json", report_json(r));
        for (const auto& e : r.entries)
            log << std::left << std::setw(18) << e.name << ' ' << csv(e.margin) << (e.margin <= 1.0 ? "" : "  VIOLATED")
                << '\n';
        return 0;
    });
}

int cmd_report(const std::string& snapshot, const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
    return guarded(out_dir, log, [&]() {
        if (snapshot.empty()) fail(ErrorKind::InvalidArgument, "report needs --snapshot");
        const GraphField v = read_graph_binary_file(snapshot);
        const Decomposition d = fit_parameters(v, 0.5);
        const Constants consts = constants_for(cfg);
        json rep;
        rep["decomposition"] = json::parse(decomposition_record(d, Frame{}));
        rep["conditions"] = report_json(condition_check(v, 0.0, d.params.a, consts));
        rep["lyapunov"] = lyapunov_json(lyapunov_table(v));
        const auto e = theta_energy(v);
        rep["theta_energy"] = {e[0], e[1], e[2], e[3]};
        write_json(out_dir, "report.json", rep);
        log << "report written to " << (fs::path(out_dir) / "report.json").string() << '\n';
        return 0;
    });
}

}  // namespace neck
