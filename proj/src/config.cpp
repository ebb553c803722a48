#include "neckpinch/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "neckpinch/errors.hpp"
#include "neckpinch/numfmt.hpp"

namespace neck {

bool operator==(const SolverConfig& a, const SolverConfig& b) {
    return a.y_max == b.y_max && a.ny == b.ny && a.nth == b.nth && a.cfl == b.cfl &&
           a.refit_interval == b.refit_interval && a.optimal_every == b.optimal_every &&
           a.sample_interval == b.sample_interval && a.lambda_min == b.lambda_min && a.v_min == b.v_min &&
           a.tau_max == b.tau_max && a.v_floor == b.v_floor && a.keep_snapshots == b.keep_snapshots &&
           a.max_steps == b.max_steps;
}

bool operator==(const PerturbationSpec& a, const PerturbationSpec& b) {
    if (a.higher.size() != b.higher.size()) return false;
    for (std::size_t i = 0; i < a.higher.size(); ++i) {
        const auto &x = a.higher[i], &y = b.higher[i];
        if (x.k != y.k || x.amplitude != y.amplitude || x.width != y.width || x.sine != y.sine) return false;
    }
    return a.b0 == b.b0 && a.a0 == b.a0 && a.eps0 == b.eps0 && a.eps1 == b.eps1 && a.eps2 == b.eps2 &&
           a.eps3 == b.eps3 && a.eps4 == b.eps4;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.solver == b.solver && a.perturbation == b.perturbation && a.propagator == b.propagator &&
           a.diagnostic_every == b.diagnostic_every && a.output_dir == b.output_dir &&
           a.constants_file == b.constants_file && a.seed == b.seed && a.spectrum_a == b.spectrum_a;
}

namespace {

struct Field {
    std::string section;
    std::string key;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

double to_double(const std::string& key, const std::string& v) {
    double x = 0.0;
    if (!parse_double(v, x)) fail(ErrorKind::Config, "bad number for '" + key + "': " + v);
    return x;
}

long long to_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail(ErrorKind::Config, "bad integer for '" + key + "': " + v);
    }
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail(ErrorKind::Config, "bad boolean for '" + key + "': " + v);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string higher_to_string(const std::vector<HigherMode>& h) {
    std::string out;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(h[i].k) + ":" + fmt_double(h[i].amplitude) + ":" + fmt_double(h[i].width) + ":" +
               (h[i].sine ? "sin" : "cos");
    }
    return out;
}

std::vector<HigherMode> higher_from_string(const std::string& s) {
    std::vector<HigherMode> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::vector<std::string> parts;
        std::stringstream is(item);
        std::string p;
        while (std::getline(is, p, ':')) parts.push_back(trim(p));
        if (parts.size() != 4 || (parts[3] != "cos" && parts[3] != "sin"))
            fail(ErrorKind::Config, "higher mode must read k:amplitude:width:cos|sin, got " + item);
        HigherMode m;
        m.k = static_cast<int>(to_integer("higher", parts[0]));
        m.amplitude = to_double("higher", parts[1]);
        m.width = to_double("higher", parts[2]);
        m.sine = parts[3] == "sin";
        out.push_back(m);
    }
    return out;
}

#define NP_DOUBLE(sec, name, expr)                                                          \
    Field {                                                                                  \
        sec, name, [](const RunConfig& c) { return fmt_double(c.expr); },                    \
            [](RunConfig& c, const std::string& v) { c.expr = to_double(name, v); }          \
    }
#define NP_INT(sec, name, expr, type)                                                                  \
    Field {                                                                                            \
        sec, name, [](const RunConfig& c) { return std::to_string(c.expr); },                          \
            [](RunConfig& c, const std::string& v) { c.expr = static_cast<type>(to_integer(name, v)); } \
    }

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        NP_DOUBLE("solver", "y_max", solver.y_max),
        NP_INT("solver", "ny", solver.ny, int),
        NP_INT("solver", "nth", solver.nth, int),
        NP_DOUBLE("solver", "cfl", solver.cfl),
        NP_DOUBLE("solver", "refit_interval", solver.refit_interval),
        NP_INT("solver", "optimal_every", solver.optimal_every, int),
        NP_DOUBLE("solver", "sample_interval", solver.sample_interval),
        NP_DOUBLE("solver", "lambda_min", solver.lambda_min),
        NP_DOUBLE("solver", "v_min", solver.v_min),
        NP_DOUBLE("solver", "tau_max", solver.tau_max),
        NP_DOUBLE("solver", "v_floor", solver.v_floor),
        Field{"solver", "keep_snapshots",
              [](const RunConfig& c) { return std::string(c.solver.keep_snapshots ? "true" : "false"); },
              [](RunConfig& c, const std::string& v) { c.solver.keep_snapshots = to_bool("keep_snapshots", v); }},
        NP_INT("solver", "max_steps", solver.max_steps, long),
        NP_DOUBLE("perturbation", "b0", perturbation.b0),
        NP_DOUBLE("perturbation", "a0", perturbation.a0),
        NP_DOUBLE("perturbation", "eps0", perturbation.eps0),
        NP_DOUBLE("perturbation", "eps1", perturbation.eps1),
        NP_DOUBLE("perturbation", "eps2", perturbation.eps2),
        NP_DOUBLE("perturbation", "eps3", perturbation.eps3),
        NP_DOUBLE("perturbation", "eps4", perturbation.eps4),
        Field{"perturbation", "higher", [](const RunConfig& c) { return higher_to_string(c.perturbation.higher); },
              [](RunConfig& c, const std::string& v) { c.perturbation.higher = higher_from_string(v); }},
        NP_DOUBLE("propagator", "alpha", propagator.alpha),
        NP_INT("propagator", "n_h", propagator.n_h, int),
        NP_INT("propagator", "trials", propagator.trials, int),
        NP_DOUBLE("propagator", "spectrum_a", spectrum_a),
        NP_INT("diagnostics", "every", diagnostic_every, int),
        Field{"diagnostics", "constants_file", [](const RunConfig& c) { return c.constants_file; },
              [](RunConfig& c, const std::string& v) { c.constants_file = v; }},
        Field{"run", "output_dir", [](const RunConfig& c) { return c.output_dir; },
              [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
        Field{"run", "seed", [](const RunConfig& c) { return std::to_string(c.seed); },
              [](RunConfig& c, const std::string& v) {
                  const long long x = to_integer("seed", v);
                  if (x < 0) fail(ErrorKind::Config, "seed must be nonnegative");
                  c.seed = static_cast<std::uint64_t>(x);
              }},
    };
    return f;
}

#undef NP_DOUBLE
#undef NP_INT

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "config line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') fail(ErrorKind::Config, where + "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& f : fields()) known = known || f.section == section;
            if (!known) fail(ErrorKind::Config, where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::Config, where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool found = false;
        for (const auto& f : fields())
            if (f.section == section && f.key == key) {
                f.set(c, value);
                found = true;
                break;
            }
        if (!found) fail(ErrorKind::Config, where + "unknown key '" + key + "' in [" + section + "]");
    }
    c.solver.validate();
    c.perturbation.validate();
    if (c.diagnostic_every < 1) fail(ErrorKind::Config, "diagnostics.every must be >= 1");
    if (c.propagator.trials < 1) fail(ErrorKind::Config, "propagator.trials must be >= 1");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) fail(ErrorKind::Io, "cannot open config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
    std::string out, section;
    for (const auto& f : fields()) {
        if (f.section != section) {
            if (!section.empty()) out += "\n";
            section = f.section;
            out += "[" + section + "]\n";
        }
        out += f.key + " = " + f.get(c) + "\n";
    }
    return out;
}

}  // namespace neck
