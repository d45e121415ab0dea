#include "nonlin/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "nonlin/regularize.hpp"

namespace nonlin::harness {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

void require_decreasing(const std::vector<double>& list, const char* name, std::size_t min_size = 3) {
    if (list.size() < min_size)
        throw ConfigError(std::string(name) + ": need at least " + std::to_string(min_size) + " entries");
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (!(list[i] > 0.0)) throw ConfigError(std::string(name) + ": entries must be positive");
        if (i > 0 && !(list[i] < list[i - 1])) throw ConfigError(std::string(name) + ": entries must be strictly decreasing");
    }
}

const ScalarField& require_exact(const Problem& p, const char* experiment) {
    if (!p.exact) throw ConfigError(std::string(experiment) + ": the config has no exact solution");
    return *p.exact;
}

double sup_error(const MeshFunction& v, const ScalarField& exact) {
    double e = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) e = std::max(e, std::fabs(exact.value(v.mesh().point(i)) - v[i]));
    return e;
}

struct TestFunction {
    std::string name;
    ScalarField phi;
    bool polynomial;
};

std::vector<TestFunction> test_functions(const Nonlinearity& F, int dim, const std::optional<ScalarField>& exact) {
    std::vector<TestFunction> out;
    if (exact && exact->has_exact_derivatives()) out.push_back({"exact", *exact, false});
    std::vector<double> diag(dim);
    Point b(dim);
    for (int k = 0; k < dim; ++k) {
        diag[k] = 1.0 + 0.5 * k;
        b[k] = 0.25 * (k + 1);
    }
    out.push_back({"quadratic_diagonal", ScalarField::quadratic(0.5, b, SymMat::diagonal(diag)), true});
    out.push_back({"cubic_axis", ScalarField::cubic_axis(1.0, 0, 0.5) + ScalarField::cubic_axis(-0.5, dim - 1, 0.25), true});
    // The Pucci game uses axis-aligned coefficients, exact only for lattice-diagonal Hessians.
    if (F.kind() != Nonlinearity::Kind::pucci && dim >= 2) {
        SymMat m = SymMat::diagonal(diag);
        m.set(0, 1, 0.3);
        out.push_back({"quadratic_offdiagonal", ScalarField::quadratic(0.0, Point(dim, 0.0), m), true});
    }
    return out;
}

// Test functions whose third derivative bound is unavailable are skipped.
std::optional<ConsistencyReport> try_consistency(const DiscreteOperator& op, const ScalarField& phi) {
    try {
        return consistency_check(op, phi);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::vector<double> boundary_from(const Mesh& sub, const MeshFunction& full) {
    std::vector<double> out(sub.size(), 0.0);
    for (std::size_t i = 0; i < sub.size(); ++i) {
        auto j = full.mesh().find(sub.lattice(i));
        if (!j) throw Error("boundary_from: sub-mesh point not on the full mesh");
        out[i] = full[*j];
    }
    return out;
}

void mark_aborted(RateReport& r, const std::string& why) {
    r.passed = false;
    r.extra["aborted"] = why;
}

} // namespace

ValidatedOperator build_validated(const Nonlinearity& F, const ScalarField& f, const Domain& domain, double h, int width,
                                  std::uint64_t seed, int trials, const std::optional<ScalarField>& exact) {
    MeshPtr mesh = build_mesh(domain, h, width);
    ValidatedOperator out{mesh, assemble(F, f, mesh), {}, {}};
    out.monotonicity = monotonicity_check(out.op, trials, seed);
    if (out.monotonicity.violations > 0)
        throw AssertionFailure("monotonicity violated in " + std::to_string(out.monotonicity.violations) + " of " +
                               std::to_string(out.monotonicity.trials) + " trials");
    for (const auto& t : test_functions(F, mesh->dim(), exact)) {
        auto rep = try_consistency(out.op, t.phi);
        if (!rep) continue;
        if (!rep->passed)
            throw AssertionFailure("consistency violated for " + t.name + ": discrepancy " + fmt(rep->max_discrepancy) +
                                   " > bound " + fmt(rep->bound));
        out.consistency.push_back(*rep);
    }
    return out;
}

SolveResult solve_checked(const DiscreteOperator& op, const ScalarField& g, const SolveOptions& opts) {
    SolveResult r = solve_dirichlet(op, g, opts);
    if (!r.report.converged)
        throw AssertionFailure("solver (" + r.report.method + ") did not converge: residual " + fmt(r.report.residual) +
                               " after " + std::to_string(r.report.iterations) + " iterations");
    return r;
}

namespace {

SolveResult solve_checked_boundary(const DiscreteOperator& op, const std::vector<double>& boundary, const SolveOptions& opts) {
    SolveResult r = solve_dirichlet(op, boundary, opts);
    if (!r.report.converged)
        throw AssertionFailure("solver (" + r.report.method + ") did not converge: residual " + fmt(r.report.residual));
    return r;
}

} // namespace

RateReport run_rates(const Problem& p, const std::vector<double>& h_list) {
    const ScalarField& exact = require_exact(p, "rates");
    require_decreasing(h_list, "rates.h");
    RateReport rep;
    rep.experiment = "rates";
    rep.parameter = "h";
    json iters = json::array();
    try {
        for (double h : h_list) {
            auto t0 = Clock::now();
            auto vo = build_validated(p.F, p.f, p.domain, h, p.width, p.seed, 2000, p.exact);
            auto sol = solve_checked(vo.op, p.g, p.solver);
            rep.rows.push_back({h, sup_error(sol.v, exact), seconds_since(t0), false, ""});
            iters.push_back(sol.report.iterations);
        }
    } catch (const AssertionFailure& e) {
        mark_aborted(rep, e.what());
    }
    rep.extra["solver_iterations"] = iters;
    rep.fit();
    return rep;
}

namespace {

struct DeltaSetup {
    MeshFunction v;
    DiscreteOperator op;
};

DeltaSetup solve_for_delta(const Problem& p, double h, bool corrupt_spike) {
    auto vo = build_validated(p.F, p.f, p.domain, h, p.width, p.seed, 2000, p.exact);
    auto sol = solve_checked(vo.op, p.g, p.solver);
    if (corrupt_spike) {
        std::size_t i = vo.mesh->nearest(p.domain.barycenter());
        if (!vo.mesh->is_interior(i)) i = vo.mesh->interior()[vo.mesh->interior().size() / 2];
        sol.v[i] -= 1.0;
    }
    return {std::move(sol.v), std::move(vo.op)};
}

// One side of the check: inf-convolution as δ-supersolution of F_ν = f^ν,
// or sup-convolution as δ-subsolution of F^ν = f_ν.
DeltaReport convolution_side(const Problem& p, const DeltaSetup& s, double theta, std::size_t samples, std::uint64_t seed,
                        bool super, double& nu_out) {
    const Mesh& mesh = s.v.mesh();
    const double h = mesh.h();
    const double delta = mesh.width() * h;
    const double nu = 4.0 * std::sqrt(theta) * std::sqrt(s.v.sup_norm()) + std::sqrt(double(mesh.dim())) * h;
    nu_out = nu;
    const double slack = s.op.consistency_constant() * h + p.solver.tol;
    DeltaCheckOptions opts;
    opts.check_super = super;
    opts.check_sub = !super;
    opts.margin = nu + delta;
    // Sampling on the mesh lattice keeps the magic point among the samples.
    if (super) {
        MeshFunction c = inf_convolve(s.v, theta).as_mesh_function();
        OperatorWithRhs G{perturb_inf(p.F, nu, p.domain, h), field_sup(p.f, nu, p.domain, h)};
        return delta_solution_check(c, G, delta, samples, 10.0 / delta, slack, seed, opts);
    }
    MeshFunction c = sup_convolve(s.v, theta).as_mesh_function();
    OperatorWithRhs G{perturb_sup(p.F, nu, p.domain, h), field_inf(p.f, nu, p.domain, h)};
    return delta_solution_check(c, G, delta, samples, 10.0 / delta, slack, seed, opts);
}

} // namespace

ConvolutionDeltaResult verify_convolution_delta(const Problem& p, double h, double theta, std::size_t samples, std::uint64_t seed,
                           bool corrupt_spike) {
    if (!(theta > 0.0)) throw ConfigError("delta: theta must be positive");
    DeltaSetup s = solve_for_delta(p, h, corrupt_spike);
    ConvolutionDeltaResult r;
    r.super = convolution_side(p, s, theta, samples, seed, true, r.nu);
    r.sub = convolution_side(p, s, theta, samples, seed + 1, false, r.nu);
    r.delta = s.v.mesh().width() * h;
    r.slack = r.super.slack;
    return r;
}

RateReport run_delta(const Problem& p, const std::vector<double>& theta_list, const DeltaOptions& opts) {
    const ScalarField& exact = require_exact(p, "delta");
    require_decreasing(theta_list, "delta.theta");
    RateReport rep;
    rep.experiment = "delta";
    rep.parameter = "delta";
    rep.extra["h"] = opts.h;
    rep.extra["theta_rule"] = "theta = delta^2";
    json checks = json::array();
    try {
        DeltaSetup s = solve_for_delta(p, opts.h, opts.corrupt_spike);
        for (std::size_t k = 0; k < theta_list.size(); ++k) {
            const double theta = theta_list[k];
            auto t0 = Clock::now();
            MeshFunction c = inf_convolve(s.v, theta).as_mesh_function();
            RateRow row{std::sqrt(theta), sup_error(c, exact), 0.0, false, ""};
            if (opts.verify) {
                double nu = 0.0;
                DeltaReport d = convolution_side(p, s, theta, opts.samples, p.seed + k, true, nu);
                json dj = json::parse(d.to_json());
                dj["theta"] = theta;
                dj["nu"] = nu;
                checks.push_back(dj);
                if (d.violations > 0) {
                    row.excluded = true;
                    row.note = "verification failed: " + std::to_string(d.violations) + " violations";
                } else if (d.inconclusive()) {
                    row.note = "verification inconclusive: no admissible touches";
                }
            }
            row.runtime_s = seconds_since(t0);
            rep.rows.push_back(row);
        }
    } catch (const AssertionFailure& e) {
        mark_aborted(rep, e.what());
    }
    if (opts.verify) rep.extra["verification"] = checks;
    rep.fit();
    return rep;
}

RateReport run_freeze(const Problem& p, const Point& x0, const std::vector<double>& r_list, double h) {
    require_decreasing(r_list, "freeze.r");
    if (static_cast<int>(x0.size()) != p.domain.dim()) throw ConfigError("freeze.x0: dimension mismatch");
    if (!p.domain.contains(x0) || distance_to_boundary(p.domain, x0) < r_list.front())
        throw ConfigError("freeze: B_r(x0) leaves the domain for r = " + fmt(r_list.front()));
    RateReport rep;
    rep.experiment = "freeze";
    rep.parameter = "r";
    rep.extra["x0"] = x0;
    rep.extra["h"] = h;
    try {
        auto full = build_validated(p.F, p.f, p.domain, h, p.width, p.seed, 2000, p.exact);
        auto u = solve_checked(full.op, p.g, p.solver);
        const Nonlinearity F0 = freeze(p.F, x0);
        const ScalarField f0 = ScalarField::constant(p.f.value(x0));
        for (double r : r_list) {
            auto t0 = Clock::now();
            Domain ball = Domain::ball(x0, r);
            auto vo = build_validated(F0, f0, ball, h, p.width, p.seed, 2000);
            auto ut = solve_checked_boundary(vo.op, boundary_from(*vo.mesh, u.v), p.solver);
            double e = 0.0;
            for (std::size_t i = 0; i < vo.mesh->size(); ++i) {
                auto j = u.v.mesh().find(vo.mesh->lattice(i));
                e = std::max(e, std::fabs(ut.v[i] - u.v[*j]));
            }
            rep.rows.push_back({r, e, seconds_since(t0), false, ""});
        }
    } catch (const AssertionFailure& e) {
        mark_aborted(rep, e.what());
    }
    rep.fit();
    return rep;
}

RateReport run_perturb(const Problem& p, const std::vector<double>& eps_list, double h) {
    require_decreasing(eps_list, "perturb.eps");
    RateReport rep;
    rep.experiment = "perturb";
    rep.parameter = "eps";
    rep.extra["h"] = h;
    json order = json::array();
    try {
        auto base = build_validated(p.F, p.f, p.domain, h, p.width, p.seed, 2000, p.exact);
        auto u = solve_checked(base.op, p.g, p.solver);
        for (double eps : eps_list) {
            auto t0 = Clock::now();
            auto vo = build_validated(perturb_inf(p.F, eps, p.domain), field_sup(p.f, eps, p.domain), p.domain, h, p.width,
                                      p.seed, 2000);
            auto ue = solve_checked(vo.op, p.g, p.solver);
            double excess = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ue.v.size(); ++i) excess = std::max(excess, ue.v[i] - u.v[i]);
            RateRow row{eps, sup_distance(ue.v, u.v), seconds_since(t0), false, ""};
            if (excess > 1e-8) {
                rep.passed = false;
                row.note = "one-sided order violated: max(u_eps - u) = " + fmt(excess);
            }
            order.push_back({{"eps", eps}, {"max_excess", excess}});
            rep.rows.push_back(row);
        }
    } catch (const AssertionFailure& e) {
        mark_aborted(rep, e.what());
    }
    rep.extra["one_sided"] = order;
    rep.fit();
    return rep;
}

json BarrierReport::to_json() const {
    return {{"c", c}, {"bound", bound}, {"max_gap", max_gap}, {"min_gap", min_gap}, {"passed", passed}};
}

BarrierReport run_barrier(const Problem& p, double c, double h, double tol) {
    if (!(c > 0.0)) throw ConfigError("barrier.c: must be positive");
    auto vo = build_validated(p.F, p.f, p.domain, h, p.width, p.seed, 2000, p.exact);
    auto u = solve_checked(vo.op, p.g, p.solver);
    auto vb = build_validated(p.F, p.f + ScalarField::constant(c), p.domain, h, p.width, p.seed, 2000);
    auto ub = solve_checked(vb.op, p.g, p.solver);
    BarrierReport r;
    r.c = c;
    const double diam = p.domain.diameter();
    r.bound = c * diam * diam / (2.0 * p.F.lambda());
    r.max_gap = -std::numeric_limits<double>::infinity();
    r.min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < u.v.size(); ++i) {
        double gap = u.v[i] - ub.v[i];
        r.max_gap = std::max(r.max_gap, gap);
        r.min_gap = std::min(r.min_gap, gap);
    }
    r.passed = r.min_gap >= -tol && r.max_gap <= r.bound + tol;
    return r;
}

json CheckReport::to_json() const {
    json j;
    j["monotonicity"] = {{"trials", monotonicity.trials}, {"violations", monotonicity.violations}, {"worst", monotonicity.worst}};
    json c = json::array();
    for (const auto& [name, r] : consistency)
        c.push_back({{"function", name},
                     {"max_discrepancy", r.max_discrepancy},
                     {"bound", r.bound},
                     {"K", r.K},
                     {"passed", r.passed}});
    j["consistency"] = c;
    j["ellipticity"] = {{"trials", ellipticity.trials},
                        {"violations", ellipticity.violations},
                        {"worst_excess", ellipticity.worst_excess}};
    j["polynomial_discrepancy"] = polynomial_discrepancy;
    j["passed"] = passed;
    return j;
}

CheckReport run_check(const Problem& p, double h, int trials) {
    MeshPtr mesh = build_mesh(p.domain, h, p.width);
    DiscreteOperator op = assemble(p.F, p.f, mesh);
    CheckReport r;
    r.monotonicity = monotonicity_check(op, trials, p.seed);
    bool ok = r.monotonicity.violations == 0;
    for (const auto& t : test_functions(p.F, mesh->dim(), p.exact)) {
        auto c = try_consistency(op, t.phi);
        if (!c) continue;
        ok = ok && c->passed;
        if (t.polynomial) r.polynomial_discrepancy = std::max(r.polynomial_discrepancy, c->max_discrepancy);
        r.consistency.emplace_back(t.name, *c);
    }
    r.ellipticity = check_ellipticity(p.F, p.domain, 1000, p.seed);
    r.passed = ok && r.polynomial_discrepancy <= 1e-10 && r.ellipticity.violations == 0;
    return r;
}

} // namespace nonlin::harness
