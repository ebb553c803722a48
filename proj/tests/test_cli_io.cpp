#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "json.hpp"
#include "neckpinch/commands.hpp"
#include "neckpinch/config.hpp"
#include "neckpinch/core_profile.hpp"
#include "neckpinch/errors.hpp"
#include "neckpinch/surface_graph.hpp"

using namespace neck;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Fresh empty directory; removed when the guard goes out of scope.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("neckpinch_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& sub = "") const { return sub.empty() ? path.string() : (path / sub).string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) out.push_back(l);
    return out;
}

RunConfig small_config() {
    RunConfig c;
    c.solver.ny = 161;
    c.solver.nth = 8;
    c.solver.tau_max = 0.3;
    c.propagator.trials = 3;
    c.propagator.n_h = 48;
    return c;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("config round-trips through text") {
    RunConfig c;
    CHECK(parse_config(serialize_config(c)) == c);

    c.solver.ny = 241;
    c.solver.cfl = 0.3;
    c.solver.tau_max = 2.75;
    c.solver.keep_snapshots = true;
    c.perturbation.eps3 = 0.01;
    c.perturbation.eps1 = -1.0 / 3.0;
    c.perturbation.higher = {{2, 1e-3, 1.5, false}, {3, 2e-4, 0.7, true}};
    c.propagator.trials = 7;
    c.diagnostic_every = 3;
    c.output_dir = "some/dir";
    c.constants_file = "c.txt";
    c.seed = 123456789012345ULL;
    c.spectrum_a = 0.4;
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
}

TEST_CASE("config parse errors") {
    CHECK(kind_of([] { parse_config("[solver]\nunknown_key = 1\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("[nowhere]\nny = 1\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("[solver]\ncfl = fast\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { parse_config("[perturbation]\nhigher = 2:0.1:1:tan\n"); }) == ErrorKind::Config);
    CHECK(kind_of([] { load_config("/nonexistent/neckpinch.cfg"); }) == ErrorKind::Io);
    // Comments and blank lines are ignored; unspecified keys keep their defaults.
    const RunConfig c = parse_config("# note\n\n[solver]\nny = 81  # coarse\n");
    CHECK(c.solver.ny == 81);
    CHECK(c.solver.nth == RunConfig{}.solver.nth);
}

TEST_CASE("output directory precedence") {
    RunConfig c;
    c.output_dir = "from_config";
    ::unsetenv("NECKPINCH_OUT");
    CHECK(resolve_output_dir("", c) == "from_config");
    ::setenv("NECKPINCH_OUT", "from_env", 1);
    CHECK(resolve_output_dir("", c) == "from_env");
    CHECK(resolve_output_dir("from_flag", c) == "from_flag");
    ::unsetenv("NECKPINCH_OUT");
}

TEST_CASE("simulate with tau_max = 0 emits only the initial state") {
    TempDir root("tau0");
    RunConfig c = small_config();
    c.solver.tau_max = 0.0;
    std::ostringstream log;
    CHECK(cmd_simulate(c, root.str("out"), log) == 0);
    const auto lines = lines_of(slurp(root.path / "out" / "trajectory.csv"));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == kTrajectoryHeader);
    CHECK(lines[0] == "t,tau,lambda,a,b,beta0,beta1,beta2,beta3,beta4,vmin,T_hat");
    CHECK(lines[1].rfind("0,0,", 0) == 0);
    const json rep = json::parse(slurp(root.path / "out" / "report.json"));
    CHECK(rep["stop_reason"] == "tau_max");
    CHECK(rep["steps"] == 0);
    CHECK(rep["initial_conditions"].size() > 0);
    CHECK_FALSE(rep.contains("asymptotic_fit"));
    // Everything lands below the output directory.
    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(root.path)) {
        CHECK(e.path().filename() == "out");
        ++entries;
    }
    CHECK(entries == 1);
}

TEST_CASE("spectrum command prints the table") {
    TempDir root("spectrum");
    std::ostringstream log;
    CHECK(cmd_spectrum(RunConfig{}, root.str(), log) == 0);
    const auto lines = lines_of(slurp(root.path / "spectrum.csv"));
    REQUIRE(lines.size() >= 4);
    CHECK(lines[0] == "eigenvalue,multiplicity");
    CHECK(lines[1] == "-1,1");
    CHECK(lines[2] == "-0.5,3");
    CHECK(lines[3] == "0,3");
    const auto trunc = lines_of(slurp(root.path / "spectrum_truncated.csv"));
    CHECK(trunc.size() == 8);
}

TEST_CASE("decompose on a stored profile snapshot") {
    TempDir root("decompose");
    const FormalProfile p(0.5, 0.1);
    const GraphField v = GraphField::from_function(16.0, 161, 8, [&](double y, double) { return p.value(y); });
    write_graph_binary_file(v, root.str("profile.npgf"));
    std::ostringstream log;
    CHECK(cmd_decompose(root.str("profile.npgf"), RunConfig{}, root.str("out"), log) == 0);
    const json rec = json::parse(slurp(root.path / "out" / "decomposition.json"));
    for (const auto& b : rec["beta"]) CHECK(std::abs(b.get<double>()) < 1e-10);
    CHECK(rec["a"].get<double>() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(rec["b"].get<double>() == doctest::Approx(0.1).epsilon(1e-10));
    CHECK(rec["frame"]["quaternion"][0].get<double>() == 1.0);
}

TEST_CASE("module failures produce an error record") {
    TempDir root("error");
    std::ostringstream log;
    CHECK(cmd_decompose(root.str("missing.npgf"), RunConfig{}, root.str("out"), log) != 0);
    const json err = json::parse(slurp(root.path / "out" / "error.json"));
    CHECK(err["kind"] == "Io");
    CHECK_FALSE(err["message"].get<std::string>().empty());

    RunConfig bad = small_config();
    bad.perturbation.eps1 = -5.0;
    CHECK(cmd_simulate(bad, root.str("out2"), log) != 0);
    CHECK(json::parse(slurp(root.path / "out2" / "error.json"))["kind"] == "Nonpositive");
}

TEST_CASE("propagator and assumption commands") {
    TempDir root("wrappers");
    std::ostringstream log;
    const RunConfig c = small_config();
    CHECK(cmd_propagator_test(c, root.str("p"), log) == 0);
    const auto decay = lines_of(slurp(root.path / "p" / "decay.csv"));
    CHECK(decay[0] == "trial,ell,alpha,rate,residual");
    CHECK(decay.size() == 1 + 2 * static_cast<std::size_t>(c.propagator.trials));
    CHECK(log.str().find("PASS ell=5") != std::string::npos);

    CHECK(cmd_check_assumptions(c, root.str("a"), log) == 0);
    const json a = json::parse(slurp(root.path / "a" / "assumptions.json"));
    bool has_a2 = false;
    for (const auto& e : a) has_a2 = has_a2 || e["name"] == "A2";
    CHECK(has_a2);
}

TEST_CASE("command-line runs are deterministic") {
    TempDir root("determinism");
    RunConfig c = small_config();
    c.perturbation.eps3 = 0.005;
    {
        std::ofstream os(root.path / "run.cfg");
        os << serialize_config(c);
    }
    const std::string cli = NECKPINCH_CLI;
    for (const char* d : {"r1", "r2"}) {
        const std::string cmd = "\"" + cli + "\" simulate --config \"" + root.str("run.cfg") + "\" --output-dir \"" +
                                root.str(d) + "\" > /dev/null";
        REQUIRE(std::system(cmd.c_str()) == 0);
    }
    for (const char* f : {"trajectory.csv", "refits.csv", "samples.csv", "final.npgf"}) {
        CAPTURE(f);
        const std::string a = slurp(root.path / "r1" / f), b = slurp(root.path / "r2" / f);
        CHECK_FALSE(a.empty());
        CHECK(a == b);
    }
    CHECK(lines_of(slurp(root.path / "r1" / "trajectory.csv")).size() == 5);

    const std::string seeds = "\"" + cli + "\" propagator-test --config \"" + root.str("run.cfg") +
                              "\" --seed 7 --output-dir \"";
    REQUIRE(std::system((seeds + root.str("s1") + "\" > /dev/null").c_str()) == 0);
    REQUIRE(std::system((seeds + root.str("s2") + "\" > /dev/null").c_str()) == 0);
    CHECK(slurp(root.path / "s1" / "decay.csv") == slurp(root.path / "s2" / "decay.csv"));

    const std::string missing = "\"" + cli + "\" simulate --config /nonexistent.cfg > /dev/null 2>&1";
    CHECK(std::system(missing.c_str()) != 0);
}
