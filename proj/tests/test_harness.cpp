#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "nonlin/harness/config.hpp"
#include "nonlin/harness/experiments.hpp"

using namespace nonlin;
using namespace nonlin::harness;
namespace fs = std::filesystem;

namespace {

const std::string kPucciConst = R"({
  "name": "pucci_const",
  "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
  "operator": {"kind": "pucci", "lambda": 1, "Lambda": 2, "sign": -1},
  "f": 1,
  "g": {"kind": "affine", "c": 0.1, "b": [0.5, -0.25]},
  "stencil_width": 1,
  "solver": {"method": "policy", "tol": 1e-10, "max_iter": 200},
  "seed": 5,
  "h": 0.0625
})";

const std::string kSmallLaplace = R"({
  "name": "small_laplace",
  "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
  "operator": {"kind": "linear", "coeff": "identity"},
  "exact": "sin_pi",
  "f": "manufactured",
  "stencil_width": 1,
  "seed": 1,
  "h": 0.0625,
  "experiments": {"rates": {"h": [0.25, 0.125, 0.0625]}, "check": {"trials": 500}}
})";

std::string config_error(const std::string& text) {
    try {
        (void)parse_problem(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

fs::path scratch_dir() {
    fs::path d = fs::temp_directory_path() / ("nonlin_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

std::string write_file(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
    return p.string();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(NONLIN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config parsing") {
    Problem p = parse_problem(kSmallLaplace);
    CHECK(p.name == "small_laplace");
    CHECK(p.width == 1);
    CHECK(p.h == 0.0625);
    REQUIRE(p.exact);
    CHECK(p.f.value(std::vector<double>{0.25, 0.5}) ==
          doctest::Approx(-2.0 * M_PI * M_PI * std::sin(M_PI * 0.25)).epsilon(1e-12));
    CHECK(p.g.value(std::vector<double>{0.5, 0.5}) == doctest::Approx(1.0));

    for (const char* name : {"laplace.json", "isaacs.json", "linear_vc.json", "perturb.json", "pucci.json"})
        CHECK_NOTHROW(load_problem(std::string(NONLIN_CONFIG_DIR) + "/" + name));

    std::string bad_syntax = "{\n  \"name\": \"x\",\n  \"h\": ,\n}";
    std::string msg = config_error(bad_syntax);
    CHECK(msg.find("line 3") != std::string::npos);

    std::string no_exact = R"({"domain": {"kind": "box", "lo": [0], "hi": [1]},
        "operator": {"kind": "linear", "coeff": "identity"}, "f": "manufactured"})";
    CHECK(config_error(no_exact).find("'f'") != std::string::npos);

    std::string unknown = R"({"domain": {"kind": "box", "lo": [0], "hi": [1]}, "colour": 1,
        "operator": {"kind": "linear", "coeff": "identity"}, "f": 0, "g": 0})";
    CHECK(config_error(unknown).find("colour") != std::string::npos);

    std::string bad_sign = R"({"domain": {"kind": "box", "lo": [0], "hi": [1]},
        "operator": {"kind": "pucci", "lambda": 1, "Lambda": 2, "sign": 0}, "f": 0, "g": 0})";
    CHECK(config_error(bad_sign).find("sign") != std::string::npos);

    CHECK_THROWS_AS(load_problem("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("rate fit against a two-point log ratio") {
    RateReport r;
    for (double h : {0.1, 0.05, 0.025, 0.0125}) r.rows.push_back({h, 3.0 * std::pow(h, 1.7), 0.0, false, ""});
    r.fit();
    REQUIRE(r.slope);
    const double two_point = std::log(r.rows[0].error / r.rows[3].error) / std::log(r.rows[0].parameter / r.rows[3].parameter);
    CHECK(*r.slope == doctest::Approx(two_point).epsilon(1e-10));
    CHECK(*r.slope == doctest::Approx(1.7).epsilon(1e-10));
    CHECK(*r.r2 == doctest::Approx(1.0));
    CHECK(r.reliable);
    CHECK(r.errors_decreasing());

    RateReport flat;
    for (double h : {0.1, 0.05, 0.025}) flat.rows.push_back({h, 1e-14, 0.0, false, ""});
    flat.fit();
    CHECK_FALSE(flat.slope);
    CHECK_FALSE(flat.reliable);

    RateReport few;
    few.rows = {{0.1, 1.0, 0.0, false, ""}, {0.05, 0.5, 0.0, false, ""}, {0.025, 0.25, 0.0, true, "excluded"}};
    few.fit();
    CHECK_FALSE(few.slope);

    std::ostringstream os;
    r.write_csv(os);
    CHECK(os.str().rfind("h,error,runtime_s\n", 0) == 0);
    auto j = r.to_json();
    CHECK(j.contains("slope"));
    CHECK(j["rows"].size() == 4);
}

TEST_CASE("run_rates: affine exact solution gives an undefined slope; runs are deterministic") {
    auto p = parse_problem(R"({
      "domain": {"kind": "box", "lo": [0, 0], "hi": [1, 1]},
      "operator": {"kind": "linear", "coeff": "identity"},
      "exact": {"kind": "affine", "c": 1, "b": [2, -1]}, "f": "manufactured", "stencil_width": 1})");
    auto r = run_rates(p, {0.25, 0.125, 0.0625});
    CHECK_FALSE(r.slope);
    for (const auto& row : r.rows) CHECK(row.error < 1e-9);

    auto q = parse_problem(kSmallLaplace);
    auto a = run_rates(q, {0.25, 0.125, 0.0625});
    auto b = run_rates(q, {0.25, 0.125, 0.0625});
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].error == b.rows[i].error);
    CHECK(a.errors_decreasing());
}

TEST_CASE("freeze and perturb are exact for x-independent problems") {
    auto p = parse_problem(kPucciConst);
    auto fr = run_freeze(p, {0.5, 0.5}, {0.4, 0.3, 0.2}, 0.0625);
    for (const auto& row : fr.rows) CHECK(row.error <= 2.0 * p.solver.tol);

    auto pe = run_perturb(p, {0.2, 0.1, 0.05}, 0.0625);
    CHECK(pe.passed);
    for (const auto& row : pe.rows) CHECK(row.error <= 2.0 * p.solver.tol);
}

TEST_CASE("barrier gap shrinks with c") {
    auto p = parse_problem(kPucciConst);
    double prev = INFINITY;
    for (double c : {1.0, 0.1, 0.01, 0.001}) {
        auto r = run_barrier(p, c, 0.0625);
        CHECK(r.passed);
        CHECK(r.min_gap >= -1e-8);
        CHECK(r.max_gap <= r.bound + 1e-8);
        CHECK(r.bound == doctest::Approx(c * 2.0 / 2.0));
        CHECK(r.max_gap <= prev + 1e-12);
        prev = r.max_gap;
    }
    CHECK(prev <= 1e-3);
    CHECK_THROWS(run_barrier(p, 0.0, 0.0625));
}

TEST_CASE("build_validated passes a monotone setup; solve_checked reports non-convergence") {
    auto p = parse_problem(kPucciConst);
    auto v = build_validated(p.F, p.f, p.domain, 0.0625, 1, 3, 500);
    CHECK(v.monotonicity.violations == 0);
    CHECK_FALSE(v.consistency.empty());

    SolveOptions o;
    o.method = SolveMethod::relax;
    o.max_iter = 2;
    CHECK_THROWS_AS(solve_checked(v.op, p.g, o), AssertionFailure);

    auto chk = run_check(p, 0.0625, 500);
    CHECK(chk.passed);
    CHECK(chk.polynomial_discrepancy < 1e-9);
}

TEST_CASE("CLI exit codes and outputs") {
    const fs::path dir = scratch_dir();
    const std::string good = write_file(dir / "small.json", kSmallLaplace);

    const fs::path csv = dir / "rates.csv";
    CHECK(run_cli("rates --config " + good + " --out " + csv.string()) == 0);
    const std::string text = read_file(csv);
    CHECK(text.rfind("h,error,runtime_s\n", 0) == 0);
    CHECK(fs::exists(dir / "rates.csv.json"));

    CHECK(run_cli("check --config " + good + " --out " + (dir / "check.json").string()) == 0);
    CHECK(read_file(dir / "check.json").find("\"passed\": true") != std::string::npos);

    CHECK(run_cli("solve --config " + good + " --out " + (dir / "sol.csv").string()) == 0);
    CHECK(read_file(dir / "sol.csv").rfind("x0,x1,v\n", 0) == 0);

    std::string slow = kSmallLaplace;
    slow.replace(slow.find("\"stencil_width\": 1,"), 19,
                 "\"stencil_width\": 1, \"solver\": {\"method\": \"relax\", \"max_iter\": 2},");
    CHECK(run_cli("solve --config " + write_file(dir / "slow.json", slow) + " --out " + (dir / "x.csv").string()) == 1);

    std::string broken = kSmallLaplace;
    broken.replace(broken.find("\"seed\""), 6, "\"sede\"");
    CHECK(run_cli("rates --config " + write_file(dir / "broken.json", broken)) == 2);
    CHECK(run_cli("rates --config " + (dir / "missing.json").string()) == 2);
    CHECK(run_cli("rates --bogus-flag") == 2);
    CHECK(run_cli("") == 2);

    // Same seed, same numbers (runtime column aside).
    auto strip_runtime = [](const std::string& s) {
        std::istringstream in(s);
        std::string line, out;
        while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
        return out;
    };
    CHECK(run_cli("rates --config " + good + " --seed 9 --out " + (dir / "a.csv").string()) == 0);
    CHECK(run_cli("rates --config " + good + " --seed 9 --out " + (dir / "b.csv").string()) == 0);
    CHECK(strip_runtime(read_file(dir / "a.csv")) == strip_runtime(read_file(dir / "b.csv")));

    fs::remove_all(dir);
}
