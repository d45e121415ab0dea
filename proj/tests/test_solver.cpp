#include <doctest.h>

#include <cmath>
#include <random>

#include "nonlin/solver.hpp"

using namespace nonlin;

namespace {

const Domain kUnitSquare = Domain::box({0.0, 0.0}, {1.0, 1.0});

Nonlinearity laplacian() { return Nonlinearity::linear(CoeffField::constant(SymMat::identity(2)), 1.0, 1.0); }

Nonlinearity random_isaacs(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<std::vector<CoeffField>> a(2, std::vector<CoeffField>(2));
    for (auto& row : a) {
        for (auto& c : row) {
            double off = 0.4 * (2 * U(rng) - 1);
            c = CoeffField::constant(SymMat::from_rows({{std::fabs(off) + 0.5 + U(rng), off}, {off, std::fabs(off) + 0.5 + U(rng)}}));
        }
    }
    return Nonlinearity::isaacs(a, {}, 0.5, 3.0);
}

ScalarField from_values(std::function<double(std::span<const double>)> fn) {
    return ScalarField::from_function("test", std::move(fn), 10.0);
}

} // namespace

TEST_CASE("affine boundary data give the affine solution") {
    auto mesh = build_mesh(kUnitSquare, 1.0 / 16, 1);
    auto op = assemble(laplacian(), ScalarField::constant(0.0), mesh);
    auto g = ScalarField::affine(0.0, {1.0, 2.0});
    for (auto method : {SolveMethod::policy, SolveMethod::relax}) {
        SolveOptions o;
        o.method = method;
        o.max_iter = method == SolveMethod::relax ? 100000 : 200;
        auto r = solve_dirichlet(op, g, o);
        CHECK(r.report.converged);
        for (std::size_t i = 0; i < mesh->size(); ++i) CHECK(r.v[i] == doctest::Approx(g.value(mesh->point(i))).epsilon(1e-9));
    }
}

TEST_CASE("one interior point in 1D") {
    auto mesh = build_mesh(Domain::box({0.0}, {1.0}), 0.25, 1);
    REQUIRE(mesh->interior().size() == 1);
    auto op = assemble(Nonlinearity::linear(CoeffField::constant(SymMat::identity(1)), 1.0, 1.0), ScalarField::constant(0.0), mesh);
    auto g0 = from_values([](std::span<const double> x) { return x[0] == 0.0 ? 1.0 : 0.0; });
    auto r0 = solve_dirichlet(op, g0);
    CHECK(r0.v[2] == doctest::Approx(0.0));
    CHECK(r0.v[0] == 1.0);

    auto g1 = from_values([](std::span<const double> x) { return x[0] == 0.25 ? 0.3 : (x[0] == 0.75 ? 0.9 : 0.0); });
    auto r1 = solve_dirichlet(op, g1);
    CHECK(r1.v[2] == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("policy and relax agree on random Isaacs instances") {
    std::mt19937_64 rng(17);
    auto mesh = build_mesh(kUnitSquare, 1.0 / 16, 2);
    for (int t = 0; t < 3; ++t) {
        auto F = random_isaacs(rng);
        auto op = assemble(F, ScalarField::constant(1.0), mesh);
        auto g = ScalarField::sin_product(1.0, 3.0, 2);
        SolveOptions p;
        p.tol = 1e-11;
        SolveOptions r = p;
        r.method = SolveMethod::relax;
        r.max_iter = 200000;
        auto a = solve_dirichlet(op, g, p);
        auto b = solve_dirichlet(op, g, r);
        REQUIRE(a.report.converged);
        REQUIRE(b.report.converged);
        CHECK(a.report.method == "policy");
        CHECK(b.report.method == "relax");
        // Residual tol bounds the error by tol times the inverse-operator norm (<= diam^2 / (8 lambda)).
        CHECK(sup_distance(a.v, b.v) <= 10.0 * 1e-11);
    }
}

TEST_CASE("max_iter exceeded reports non-convergence") {
    auto mesh = build_mesh(kUnitSquare, 1.0 / 16, 1);
    auto op = assemble(laplacian(), ScalarField::constant(1.0), mesh);
    SolveOptions o;
    o.method = SolveMethod::relax;
    o.max_iter = 3;
    auto r = solve_dirichlet(op, ScalarField::constant(0.0), o);
    CHECK_FALSE(r.report.converged);
    CHECK(r.report.residual > o.tol);
    SolveOptions bad;
    bad.tol = 0.0;
    CHECK_THROWS(solve_dirichlet(op, ScalarField::constant(0.0), bad));
}

TEST_CASE("solver invariants: boundary bit-exactness, fresh residual, uniqueness") {
    std::mt19937_64 rng(23);
    auto mesh = build_mesh(kUnitSquare, 1.0 / 16, 2);
    auto F = random_isaacs(rng);
    auto op = assemble(F, ScalarField::sin_product(2.0, 2.0, 2), mesh);
    auto g = ScalarField::exponential(0.5, {1.0, -0.5});
    auto r = solve_dirichlet(op, g);
    REQUIRE(r.report.converged);
    for (auto i : mesh->boundary()) CHECK(r.v[i] == g.value(mesh->point(i)));
    CHECK(r.report.residual == op.residual(r.v.values()));
    CHECK(r.report.residual <= 1e-10);

    SolveOptions o;
    std::vector<double> init(mesh->size());
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    for (double& x : init) x = U(rng);
    o.initial = init;
    auto r2 = solve_dirichlet(op, g, o);
    REQUIRE(r2.report.converged);
    CHECK(sup_distance(r.v, r2.v) <= 10.0 * 1e-10);
}

TEST_CASE("comparison examples") {
    auto mesh = build_mesh(kUnitSquare, 1.0 / 16, 1);
    auto op = assemble(Nonlinearity::pucci(1.0, 2.0, 1), ScalarField::constant(1.0), mesh);
    auto g = ScalarField::affine(0.2, {0.5, -0.3});
    auto v1 = solve_dirichlet(op, g).v;
    auto v2 = solve_dirichlet(op, g + ScalarField::constant(0.1)).v;

    auto same = discrete_comparison_test(op, v1, v1);
    CHECK(same.preconditions_ok);
    CHECK(same.holds());

    auto rep = discrete_comparison_test(op, v1, v2);
    CHECK(rep.preconditions_ok);
    CHECK(rep.boundary_ordered);
    CHECK(rep.ordered);
    for (std::size_t i = 0; i < mesh->size(); ++i) {
        CHECK(v2[i] >= v1[i] - 1e-9);
        CHECK(v2[i] - v1[i] <= 0.1 + 1e-9);
    }

    MeshFunction shifted = v1;
    for (auto i : mesh->interior()) shifted[i] -= 0.1;
    CHECK_FALSE(discrete_comparison_test(op, shifted, v1).preconditions_ok);
}

TEST_CASE("property: monotone dependence on boundary data") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto mesh = build_mesh(kUnitSquare, 1.0 / 16, 2);
    auto F = random_isaacs(rng);
    auto op = assemble(F, ScalarField::constant(-1.0), mesh);
    for (int t = 0; t < 10; ++t) {
        std::vector<double> g1(mesh->size()), g2(mesh->size());
        for (std::size_t i = 0; i < g1.size(); ++i) {
            g1[i] = U(rng);
            g2[i] = g1[i] + std::max(0.0, U(rng));
        }
        auto v1 = solve_dirichlet(op, g1).v;
        auto v2 = solve_dirichlet(op, g2).v;
        auto rep = discrete_comparison_test(op, v1, v2);
        CHECK(rep.preconditions_ok);
        CHECK(rep.boundary_ordered);
        CHECK(rep.holds());
        CHECK(rep.max_excess <= 1e-9);
    }
}

TEST_CASE("holder_norm examples") {
    auto mesh = build_mesh(Domain::box({0.0}, {1.0}), 1.0 / 64, 1);
    auto c = MeshFunction::sample(mesh, [](std::span<const double>) { return 2.0; });
    CHECK(holder_norm(c, 1.0).value == 0.0);
    auto lin = MeshFunction::sample(mesh, [](std::span<const double> x) { return x[0]; });
    CHECK(holder_norm(lin, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
    auto root = MeshFunction::sample(mesh, [](std::span<const double> x) { return std::sqrt(x[0]); });
    auto hr = holder_norm(root, 0.5);
    CHECK(hr.exact);
    CHECK(hr.pairs == 65u * 64u / 2u);
    CHECK(hr.value == doctest::Approx(1.0).epsilon(1e-12));

    auto sub = holder_norm(root, 0.5, 100, 3);
    CHECK_FALSE(sub.exact);
    CHECK(sub.pairs == 100u);
    CHECK(sub.value <= hr.value + 1e-15);
    CHECK_THROWS(holder_norm(root, 0.0));
    CHECK_THROWS(holder_norm(root, 1.5));
}
