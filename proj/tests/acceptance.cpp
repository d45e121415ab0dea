// Acceptance checks: `acceptance <id>` runs one criterion (1-9 or "delta"),
// no argument runs all of them. Prints one PASS/FAIL line per criterion and
// exits nonzero when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "nonlin/harness/config.hpp"
#include "nonlin/harness/experiments.hpp"
#include "nonlin/regularize.hpp"
#include "nonlin/solver.hpp"
#include "nonlin/viscosity.hpp"

using namespace nonlin;
using namespace nonlin::harness;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Timer {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Problem config(const std::string& name) { return load_problem(std::string(NONLIN_CONFIG_DIR) + "/" + name); }

std::vector<double> list(const Problem& p, const char* sec, const char* key) {
    return p.experiments.at(sec).at(key).get<std::vector<double>>();
}

double number(const Problem& p, const char* sec, const char* key) { return p.experiments.at(sec).at(key).get<double>(); }

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

std::string slope_text(const RateReport& r) {
    if (!r.slope) return "slope=undefined";
    return "slope=" + fmt("%.3f", *r.slope) + " R2=" + fmt("%.4f", *r.r2);
}

std::string errors_text(const RateReport& r) {
    std::string s = "errors=[";
    for (std::size_t i = 0; i < r.rows.size(); ++i) s += (i ? ", " : "") + fmt("%.3e", r.rows[i].error);
    return s + "]";
}

Outcome criterion_1() {
    Timer t;
    bool ok = true;
    std::ostringstream d;
    for (const char* name : {"laplace.json", "isaacs.json", "linear_vc.json", "perturb.json", "pucci.json"}) {
        Problem p = config(name);
        auto r = run_check(p, number(p, "check", "h"), 10000);
        bool cons = true;
        for (const auto& [fn, c] : r.consistency) cons = cons && c.passed;
        const bool good = r.monotonicity.violations == 0 && cons && r.polynomial_discrepancy <= 1e-10 && r.passed;
        ok = ok && good;
        d << p.name << "{mono_viol=" << r.monotonicity.violations << "/" << r.monotonicity.trials
          << " consistency=" << (cons ? "ok" : "FAIL") << " poly_disc=" << fmt("%.1e", r.polynomial_discrepancy) << "} ";
    }
    const double s = t.seconds();
    ok = ok && s < 10.0;
    d << "runtime=" << fmt("%.2f", s) << "s (limit 10s)";
    return {ok, d.str()};
}

Outcome criterion_2() {
    Timer t;
    Problem lap = config("laplace.json");
    auto a = run_rates(lap, list(lap, "rates", "h"));
    const double lap_s = t.seconds();
    const bool lap_ok = a.passed && a.slope && *a.slope >= 1.9 && *a.r2 >= 0.99 && lap_s < 60.0;

    Problem isa = config("isaacs.json");
    auto b = run_rates(isa, list(isa, "rates", "h"));
    const bool isa_ok = b.passed && b.errors_decreasing() && b.slope && *b.slope >= 0.5;

    std::ostringstream d;
    d << "laplace{" << slope_text(a) << " " << errors_text(a) << " need slope>=1.9,R2>=0.99; runtime=" << fmt("%.2f", lap_s)
      << "s} isaacs{" << slope_text(b) << " " << errors_text(b)
      << " decreasing=" << (b.errors_decreasing() ? "yes" : "no") << " need slope>=0.5}";
    return {lap_ok && isa_ok, d.str()};
}

Outcome criterion_3() {
    Timer t;
    Problem p = config("linear_vc.json");
    auto r = run_freeze(p, list(p, "freeze", "x0"), list(p, "freeze", "r"), number(p, "freeze", "h"));
    const double s = t.seconds();
    const bool ok = r.passed && r.slope && *r.slope >= 2.0 && s < 120.0;
    return {ok, slope_text(r) + " " + errors_text(r) + " need slope>=2.0; runtime=" + fmt("%.2f", s) + "s"};
}

Outcome criterion_4() {
    Problem p = config("perturb.json");
    auto r = run_perturb(p, list(p, "perturb", "eps"), number(p, "perturb", "h"));
    const bool ok = r.passed && r.slope && *r.slope >= 0.7 && *r.slope <= 1.3;
    return {ok, slope_text(r) + " " + errors_text(r) + " one_sided=" + (r.passed ? "ok" : "FAIL") +
                    " need slope in [0.7,1.3]"};
}

Outcome criterion_5() {
    Problem p = config("laplace.json");
    p.width = static_cast<int>(number(p, "delta", "stencil_width"));
    const double h = 1.0 / 32;
    const double theta = (p.width * h) * (p.width * h);
    auto r = verify_convolution_delta(p, h, theta, 40000, p.seed);
    const bool ok = r.super.accepted >= 1000 && r.super.violations == 0 && r.sub.accepted >= 1000 && r.sub.violations == 0;
    std::ostringstream d;
    d << "N=" << p.width << " delta=" << fmt("%.4f", r.delta) << " nu=" << fmt("%.4f", r.nu) << " super{accepted="
      << r.super.accepted << " violations=" << r.super.violations << " worst_margin=" << fmt("%.3e", r.super.worst_margin)
      << "} sub{accepted=" << r.sub.accepted << " violations=" << r.sub.violations
      << " worst_margin=" << fmt("%.3e", r.sub.worst_margin) << "} need >=1000 accepted, 0 violations per side";
    return {ok, d.str()};
}

Outcome criterion_6() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::size_t semi = 0, gap = 0, close = 0, mismatch = 0, points = 0;
    for (int t = 0; t < 20; ++t) {
        const int dim = 1 + t % 3;
        Domain d = t % 2 ? Domain::box(Point(dim, 0.0), Point(dim, 1.0)) : Domain::ball(Point(dim, 0.5), 0.5);
        const double h = dim == 1 ? 1.0 / 400 : dim == 2 ? 1.0 / 60 : 1.0 / 18;
        auto mesh = build_mesh(d, h, 1);
        Point b(dim);
        for (double& c : b) c = 2 * U(rng) - 1;
        auto field = ScalarField::sin_product(0.5 + U(rng), 1.0 + 5.0 * U(rng), dim) + ScalarField::affine(U(rng), b);
        auto v = sample(mesh, field);
        const double theta = 0.0005 + 0.02 * U(rng);
        const double lip = field.lipschitz_bound(d);
        for (auto kind : {ConvolutionKind::sup, ConvolutionKind::inf}) {
            auto fast = kind == ConvolutionKind::sup ? sup_convolve(v, theta) : inf_convolve(v, theta);
            semi += semiconvexity_check(fast, *mesh).violations;
            gap += magic_point_gap(fast, lip).violations;
            close += closeness_check(fast, lip).violations;
            auto slow = convolve_brute_force(v, theta, kind);
            for (std::size_t i = 0; i < fast.values.size(); ++i)
                if (std::memcmp(&fast.values[i], &slow.values[i], sizeof(double)) != 0) ++mismatch;
            points += fast.values.size();
        }
    }
    std::ostringstream d;
    d << "semiconvexity_viol=" << semi << " magic_gap_viol=" << gap << " closeness_viol=" << close
      << " fast_vs_brute_mismatches=" << mismatch << "/" << points;
    return {semi == 0 && gap == 0 && close == 0 && mismatch == 0, d.str()};
}

Outcome criterion_7() {
    std::mt19937_64 rng(707);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    int tests = 0, fails = 0;
    double worst_upper = -INFINITY, min_ratio = INFINITY, worst_dist_margin = INFINITY;
    while (tests < 100) {
        const int k = tests;
        const int dim = 1 + k % 2;
        Domain d = k % 3 == 0 ? Domain::ball(Point(dim, 0.5), 0.5) : Domain::box(Point(dim, 0.0), Point(dim, 1.0));
        auto mesh = build_mesh(d, dim == 1 ? 1.0 / 200 : 1.0 / 24, 1);
        Point c(dim);
        for (double& x : c) x = 0.25 + 0.5 * U(rng);
        const double eta = 0.25 + 0.75 * U(rng), amp = 0.2 + 2 * U(rng), kink = 0.5 * U(rng), ph = 6 * U(rng);
        auto w = MeshFunction::sample(mesh, [&](std::span<const double> x) {
            double dist = distance_to_boundary(d, x);
            double s = 0.0;
            for (double xi : x) s += xi;
            return amp * std::pow(dist, eta) * (1.0 + 0.3 * std::sin(5 * s + ph)) - kink * std::sqrt(distance(x, c));
        });
        double sup = -INFINITY;
        for (double x : w.values()) sup = std::max(sup, x);
        if (!(sup > 0.0)) continue;
        ++tests;
        const double m = sup * (0.05 + 0.95 * U(rng));
        std::optional<Point> y;
        if (k % 4 == 1) {
            Point yy(dim);
            for (double& x : yy) x = 0.3 + 0.4 * U(rng);
            y = yy;
        }
        auto r = sliding_paraboloid(w, m, y);
        auto chk = check_sliding(w, r, holder_norm(w, eta).value, eta, 1e-9);
        if (!chk.ok()) ++fails;
        worst_upper = std::max(worst_upper, chk.upper_bound_excess);
        min_ratio = std::min(min_ratio, chk.value_ratio);
        worst_dist_margin = std::min(worst_dist_margin, chk.distance - chk.distance_bound);
    }
    std::ostringstream d;
    d << "tests=" << tests << " failures=" << fails << " max_upper_excess=" << fmt("%.2e", worst_upper)
      << " min_w(x0)/m=" << fmt("%.3f", min_ratio) << " min_distance_margin=" << fmt("%.3e", worst_dist_margin)
      << " tol=1e-9";
    return {fails == 0, d.str()};
}

Outcome criterion_8() {
    Problem p = config("laplace.json");
    const double h = number(p, "barrier", "h");
    bool ok = true;
    std::ostringstream d;
    for (double c : list(p, "barrier", "c")) {
        auto r = run_barrier(p, c, h, 1e-8);
        ok = ok && r.passed;
        d << "c=" << c << "{min_gap=" << fmt("%.2e", r.min_gap) << " max_gap=" << fmt("%.4f", r.max_gap)
          << " bound=" << fmt("%.4f", r.bound) << "} ";
    }
    d << "tol=1e-8";
    return {ok, d.str()};
}

Outcome criterion_9() {
    Problem p = config("isaacs.json");
    const double h = 1.0 / 16;
    auto v = build_validated(p.F, p.f, p.domain, h, p.width, p.seed);
    const auto& mesh = *v.mesh;
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    int ordered = 0, boundary_ordered = 0, precondition = 0;
    double worst_excess = -INFINITY;
    for (int t = 0; t < 20; ++t) {
        std::vector<double> g1(mesh.size()), g2(mesh.size());
        for (std::size_t i = 0; i < g1.size(); ++i) {
            g1[i] = U(rng);
            g2[i] = g1[i] + 0.5 * (1.0 + U(rng)) * (t % 4 == 0 ? 0.0 : 1.0);
        }
        auto s1 = solve_dirichlet(v.op, g1, p.solver), s2 = solve_dirichlet(v.op, g2, p.solver);
        auto rep = discrete_comparison_test(v.op, s1.v, s2.v, 1e-9);
        precondition += rep.preconditions_ok;
        boundary_ordered += rep.boundary_ordered;
        ordered += rep.boundary_ordered && rep.ordered;
        worst_excess = std::max(worst_excess, rep.max_excess);
    }

    SolveOptions o = p.solver;
    auto a = solve_dirichlet(v.op, p.g, o);
    std::vector<double> init(mesh.size());
    for (double& x : init) x = 10 * U(rng);
    o.initial = init;
    auto b = solve_dirichlet(v.op, p.g, o);
    const double diff = sup_distance(a.v, b.v);
    const bool unique = a.report.converged && b.report.converged && diff <= 10 * p.solver.tol;

    std::ostringstream d;
    d << "pairs=20 preconditions_ok=" << precondition << " boundary_ordered=" << boundary_ordered << " ordered=" << ordered
      << " max(v1-v2)=" << fmt("%.2e", worst_excess) << " initial_guess_gap=" << fmt("%.2e", diff)
      << " (limit " << fmt("%.0e", 10 * p.solver.tol) << ")";
    return {precondition == 20 && boundary_ordered == 20 && ordered == 20 && unique, d.str()};
}

Outcome criterion_delta() {
    Problem p = config("laplace.json");
    p.width = static_cast<int>(number(p, "delta", "stencil_width"));
    DeltaOptions o;
    o.h = number(p, "delta", "h");
    o.samples = static_cast<std::size_t>(number(p, "delta", "samples"));
    auto r = run_delta(p, list(p, "delta", "theta"), o);
    const bool ok = r.passed && r.slope && *r.slope > 0.0 && r.errors_decreasing();
    std::ostringstream d;
    d << slope_text(r) << " " << errors_text(r) << " decreasing=" << (r.errors_decreasing() ? "yes" : "no");
    for (const auto& row : r.rows)
        if (!row.note.empty()) d << " [theta=" << row.parameter * row.parameter << ": " << row.note << "]";
    d << " need slope>0 and decreasing";
    return {ok, d.str()};
}

} // namespace

int main(int argc, char** argv) {
    const std::map<std::string, std::function<Outcome()>> criteria{
        {"1", criterion_1}, {"2", criterion_2}, {"3", criterion_3}, {"4", criterion_4}, {"5", criterion_5},
        {"6", criterion_6}, {"7", criterion_7}, {"8", criterion_8}, {"9", criterion_9}, {"delta", criterion_delta}};
    std::vector<std::string> ids;
    if (argc > 1) {
        for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
    } else {
        ids = {"1", "2", "3", "4", "5", "6", "7", "8", "9", "delta"};
    }
    int failed = 0;
    for (const auto& id : ids) {
        auto it = criteria.find(id);
        if (it == criteria.end()) {
            std::fprintf(stderr, "unknown criterion '%s'\n", id.c_str());
            return 2;
        }
        Outcome o;
        try {
            o = it->second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %s: %s  %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
