#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <random>
#include <string>

#include "nonlin/scheme.hpp"

using namespace nonlin;

namespace {

const Domain kUnitSquare = Domain::box({0.0, 0.0}, {1.0, 1.0});

Nonlinearity laplacian() { return Nonlinearity::linear(CoeffField::constant(SymMat::identity(2)), 1.0, 1.0); }

SymMat reconstruct(const DirectionalWeights& w, const Stencil& st) {
    SymMat s(st.dim());
    for (std::size_t k = 0; k < st.size(); ++k) s += w.weights[k] * st.projector(k);
    return s;
}

double max_entry_diff(const SymMat& a, const SymMat& b) {
    double d = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) d = std::max(d, std::fabs(a(i, j) - b(i, j)));
    return d;
}

std::size_t direction_index(const Stencil& st, std::vector<int> v) {
    for (std::size_t k = 0; k < st.size(); ++k) {
        auto d = st.direction(k);
        if (std::equal(d.begin(), d.end(), v.begin())) return k;
    }
    return st.size();
}

} // namespace

TEST_CASE("Stencil directions are primitive, canonical, and ordered") {
    Stencil s1(2, 1);
    REQUIRE(s1.size() == 2);
    CHECK(direction_index(s1, {1, 0}) == 0);
    CHECK(direction_index(s1, {0, 1}) == 1);

    Stencil s2(2, 2);
    CHECK(s2.size() == 4);
    CHECK(direction_index(s2, {1, 1}) < s2.size());
    CHECK(direction_index(s2, {1, -1}) < s2.size());

    // Independent count of primitive, sign-canonical lattice vectors.
    for (int dim = 1; dim <= 3; ++dim) {
        for (int N = 1; N <= 3; ++N) {
            Stencil st(dim, N);
            std::size_t expect = 0;
            std::vector<int> v(dim, -N);
            while (true) {
                int sq = 0, g = 0, first = 0;
                for (int c : v) {
                    sq += c * c;
                    g = std::gcd(g, std::abs(c));
                    if (first == 0) first = c;
                }
                if (sq > 0 && sq <= N * N && g == 1 && first > 0) ++expect;
                int i = dim - 1;
                while (i >= 0 && v[i] == N) v[i--] = -N;
                if (i < 0) break;
                ++v[i];
            }
            CHECK(st.size() == expect);
            for (std::size_t k = 1; k < st.size(); ++k) CHECK(st.length(k - 1) <= st.length(k));
        }
    }
}

TEST_CASE("delta_y2 examples") {
    auto m1 = build_mesh(Domain::box({0.0}, {1.0}), 0.25, 1);
    auto u1 = MeshFunction::sample(m1, [](std::span<const double> x) { return x[0] * x[0]; });
    std::vector<int> e1{1};
    CHECK(delta_y2(u1, 2, e1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS(delta_y2(u1, 0, e1));

    auto m2 = build_mesh(kUnitSquare, 0.125, 1);
    auto u2 = MeshFunction::sample(m2, [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; });
    std::vector<int> diag{1, 1};
    auto c = m2->nearest(std::vector<double>{0.5, 0.5});
    CHECK(delta_y2(u2, c, diag) == doctest::Approx(2.0).epsilon(1e-12));
    auto affine = MeshFunction::sample(m2, [](std::span<const double> x) { return 3.0 * x[0] - x[1] + 1.0; });
    CHECK(std::fabs(delta_y2(affine, c, diag)) < 1e-12);
}

TEST_CASE("decompose_matrix examples") {
    Stencil s1(2, 1);
    auto w = decompose_matrix(SymMat::identity(2), s1);
    CHECK(w.exact());
    CHECK(w.weights[0] == doctest::Approx(1.0));
    CHECK(w.weights[1] == doctest::Approx(1.0));

    Stencil s2(2, 2);
    SymMat a = SymMat::from_rows({{2, 1}, {1, 2}});
    auto w2 = decompose_matrix(a, s2);
    CHECK(w2.exact());
    for (double x : w2.weights) CHECK(x >= 0.0);
    CHECK(max_entry_diff(reconstruct(w2, s2), a) < 1e-12);
    CHECK(w2.weights[direction_index(s2, {1, 1})] == doctest::Approx(2.0));
    CHECK(w2.weights[direction_index(s2, {0, 1})] == doctest::Approx(1.0));
    CHECK(w2.weights[direction_index(s2, {1, 0})] == doctest::Approx(1.0));

    auto w3 = decompose_matrix(SymMat::from_rows({{1, 0.9}, {0.9, 1}}), s1);
    CHECK_FALSE(w3.exact());
    CHECK(w3.residual > 0.1);
}

TEST_CASE("property: decompositions are nonnegative and reconstruct diagonally dominant matrices") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Stencil st(2, 2);
    for (int t = 0; t < 300; ++t) {
        double off = U(rng);
        SymMat a = SymMat::from_rows({{std::fabs(off) + 0.5 * (1 + U(rng)), off},
                                      {off, std::fabs(off) + 0.5 * (1 + U(rng))}});
        auto w = decompose_matrix(a, st);
        REQUIRE(w.exact());
        for (double x : w.weights) CHECK(x >= 0.0);
        CHECK(max_entry_diff(reconstruct(w, st), a) < 1e-10);
    }
}

TEST_CASE("assemble examples") {
    auto mesh = build_mesh(kUnitSquare, 0.125, 1);
    auto half = MeshFunction::sample(mesh, [](std::span<const double> x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });

    auto op = assemble(laplacian(), ScalarField::constant(0.0), mesh);
    CHECK(op.interior_count() == mesh->interior().size());
    CHECK(op.consistency_constant() == doctest::Approx(2.0 / 3.0));
    CHECK(op.max_diagonal() == doctest::Approx(2.0 / (0.125 * 0.125)));
    for (double r : op.eval(half.values())) CHECK(r == doctest::Approx(2.0).epsilon(1e-10));

    std::vector<double> d12{1.0, 2.0};
    auto isaacs = Nonlinearity::isaacs({{CoeffField::constant(SymMat::identity(2)), CoeffField::constant(SymMat::identity(2, 2.0))},
                                        {CoeffField::constant(SymMat::identity(2, 1.5)), CoeffField::constant(SymMat::diagonal(d12))}},
                                       {}, 1.0, 2.0);
    auto iop = assemble(isaacs, ScalarField::constant(0.0), mesh);
    for (double r : iop.eval(half.values())) CHECK(r == doctest::Approx(3.0).epsilon(1e-10));

    auto shifted = assemble(laplacian(), ScalarField::constant(2.0), mesh);
    CHECK(shifted.residual(half.values()) < 1e-10);
}

TEST_CASE("assemble: non-decomposable coefficients name the fix") {
    auto mesh = build_mesh(kUnitSquare, 0.125, 1);
    auto F = Nonlinearity::linear(CoeffField::constant(SymMat::from_rows({{1, 0.9}, {0.9, 1}})), 0.1, 1.9);
    try {
        (void)assemble(F, ScalarField::constant(0.0), mesh);
        FAIL("expected DecompositionError");
    } catch (const DecompositionError& e) {
        std::string msg = e.what();
        CHECK(msg.find("widen N") != std::string::npos);
        CHECK(msg.find("to at least") != std::string::npos);
    }
    auto wide = build_mesh(kUnitSquare, 0.0625, 2);
    auto op = assemble(Nonlinearity::linear(CoeffField::constant(SymMat::from_rows({{1, 0.5}, {0.5, 1}})), 0.5, 1.5),
                       ScalarField::constant(0.0), wide);
    CHECK(op.interior_count() > 0);
}

TEST_CASE("monotonicity_check") {
    auto mesh = build_mesh(kUnitSquare, 0.125, 1);
    for (const auto& F : {laplacian(), Nonlinearity::pucci(1.0, 3.0, 1), Nonlinearity::pucci(0.5, 2.0, -1)}) {
        auto op = assemble(F, ScalarField::constant(1.0), mesh);
        auto r = monotonicity_check(op, 2000, 7);
        CHECK(r.trials == 2000);
        CHECK(r.violations == 0);
    }

    Stencil st(2, 1);
    std::vector<DiscreteGame> games(mesh->interior().size());
    for (auto& g : games) {
        DiscreteLeaf leaf;
        leaf.terms = {{0u, 1.0}, {1u, -0.5}};
        g = {{{leaf}}};
    }
    DiscreteOperator bad(mesh, st, games, std::vector<double>(games.size(), 0.0));
    auto r = monotonicity_check(bad, 2000, 7);
    CHECK(r.violations > 0);
    CHECK(r.worst > 0.0);
}

TEST_CASE("consistency: polynomials are exact and smooth errors scale like h^2") {
    auto F = laplacian();
    const auto quad = ScalarField::quadratic(0.5, {0.25, 0.5}, SymMat::from_rows({{1, 0.0}, {0.0, 1.5}}));
    const auto cubic = ScalarField::cubic_axis(1.0, 0, 0.5) + ScalarField::cubic_axis(-0.5, 1, 0.25);
    const auto s = ScalarField::sin_product(1.0, std::numbers::pi, 2);
    double prev = 0.0;
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        auto mesh = build_mesh(kUnitSquare, h, 1);
        auto op = assemble(F, ScalarField::constant(0.0), mesh);
        CHECK(consistency_check(op, quad).max_discrepancy < 1e-9);
        CHECK(consistency_check(op, cubic).max_discrepancy < 1e-9);
        auto rs = consistency_check(op, s);
        CHECK(rs.passed);
        CHECK(rs.bound == doctest::Approx((2.0 / 3.0) * (1.0 + s.third_derivative_bound(kUnitSquare)) * h));
        if (prev > 0.0) CHECK(prev / rs.max_discrepancy == doctest::Approx(4.0).epsilon(0.1));
        prev = rs.max_discrepancy;
    }

    auto wide = build_mesh(kUnitSquare, 1.0 / 16, 2);
    auto off = Nonlinearity::linear(CoeffField::constant(SymMat::from_rows({{2, 1}, {1, 2}})), 1.0, 3.0);
    auto op = assemble(off, ScalarField::constant(0.0), wide);
    auto q2 = ScalarField::quadratic(0.0, {0.0, 0.0}, SymMat::from_rows({{1, 0.7}, {0.7, -2}}));
    CHECK(consistency_check(op, q2).max_discrepancy < 1e-9);
}

TEST_CASE("property: translation invariance and positive homogeneity") {
    auto mesh = build_mesh(kUnitSquare, 1.0 / 16, 2);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto isaacs = Nonlinearity::isaacs(
        {{CoeffField::constant(SymMat::from_rows({{2, 0.5}, {0.5, 1.5}})), CoeffField::constant(SymMat::identity(2))},
         {CoeffField::constant(SymMat::from_rows({{1.5, -0.3}, {-0.3, 2}}))}},
        {}, 0.5, 3.0);
    for (const auto& F : {laplacian(), Nonlinearity::pucci(1.0, 2.0, 1), isaacs}) {
        auto op = assemble(F, ScalarField::constant(0.0), mesh);
        for (int t = 0; t < 20; ++t) {
            std::vector<double> u(mesh->size());
            for (double& x : u) x = U(rng);
            const double c = 10.0 * U(rng), s = 1.0 + 3.0 * std::fabs(U(rng));
            auto base = op.eval(u);
            std::vector<double> shifted(u), scaled(u);
            for (double& x : shifted) x += c;
            for (double& x : scaled) x *= s;
            auto a = op.eval(shifted), b = op.eval(scaled);
            for (std::size_t p = 0; p < base.size(); ++p) {
                const double tol = 1e-9 * (1.0 + std::fabs(base[p]) * s);
                CHECK(std::fabs(a[p] - base[p]) <= tol * 1e3);
                CHECK(std::fabs(b[p] - s * base[p]) <= tol);
            }
        }
    }
}
