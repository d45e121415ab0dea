#include "nonlin/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "nonlin/parallel.hpp"
#include "nonlin/rng.hpp"

namespace nonlin {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> nearest_boundary_extension(const Mesh& mesh, const std::vector<double>& v) {
    std::vector<double> out = v;
    const auto& bnd = mesh.boundary();
    for (std::size_t i : mesh.interior()) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = bnd.front();
        for (std::size_t b : bnd) {
            double d = distance_sq(mesh.point(i), mesh.point(b));
            if (d < best) {
                best = d;
                arg = b;
            }
        }
        out[i] = v[arg];
    }
    return out;
}

class PolicySolver {
  public:
    PolicySolver(const DiscreteOperator& op, std::vector<double>& u, int max_solves)
        : op_(op), u_(u), max_solves_(max_solves) {
        const Mesh& mesh = op.mesh();
        const std::size_t P = op.interior_count();
        slot_.assign(mesh.size(), -1);
        for (std::size_t p = 0; p < P; ++p) slot_[op.interior_index(p)] = static_cast<std::int64_t>(p);
        gsel_.resize(P);
        asel_.resize(P);
        bsel_.resize(P);
        auto go = op.group_offsets();
        for (std::size_t p = 0; p < P; ++p) {
            gsel_[p] = go[p];
            pick_alpha(p, u_);
            pick_leaf(p);
        }
        for (std::size_t p = 0; p < P; ++p) {
            gsel_[p] = best_group(p);
            pick_alpha(p, u_);
            pick_leaf(p);
        }
    }

    /// Returns false when the solve budget ran out.
    bool run() { return solve_groups(); }
    int solves() const { return solves_; }

  private:
    double alpha_value(std::size_t p, std::uint32_t a) const {
        auto lo = op_.leaf_offsets();
        double m = std::numeric_limits<double>::infinity();
        for (std::uint32_t l = lo[a]; l < lo[a + 1]; ++l) m = std::min(m, op_.leaf_value(p, l, u_));
        return m;
    }
    double group_value(std::size_t p, std::uint32_t g) const {
        auto ao = op_.alpha_offsets();
        double m = -std::numeric_limits<double>::infinity();
        for (std::uint32_t a = ao[g]; a < ao[g + 1]; ++a) m = std::max(m, alpha_value(p, a));
        return m;
    }
    std::uint32_t best_group(std::size_t p) const {
        auto go = op_.group_offsets();
        std::uint32_t best = go[p];
        double bv = std::numeric_limits<double>::infinity();
        for (std::uint32_t g = go[p]; g < go[p + 1]; ++g) {
            double v = group_value(p, g);
            if (v < bv) {
                bv = v;
                best = g;
            }
        }
        return best;
    }
    void pick_alpha(std::size_t p, const std::vector<double>&) {
        auto ao = op_.alpha_offsets();
        std::uint32_t g = gsel_[p];
        std::uint32_t best = ao[g];
        double bv = -std::numeric_limits<double>::infinity();
        for (std::uint32_t a = ao[g]; a < ao[g + 1]; ++a) {
            double v = alpha_value(p, a);
            if (v > bv) {
                bv = v;
                best = a;
            }
        }
        asel_[p] = best;
    }
    void pick_leaf(std::size_t p) {
        auto lo = op_.leaf_offsets();
        std::uint32_t a = asel_[p];
        std::uint32_t best = lo[a];
        double bv = std::numeric_limits<double>::infinity();
        for (std::uint32_t l = lo[a]; l < lo[a + 1]; ++l) {
            double v = op_.leaf_value(p, l, u_);
            if (v < bv) {
                bv = v;
                best = l;
            }
        }
        bsel_[p] = best;
    }

    static bool better(double candidate, double current, bool want_smaller) {
        double thr = 1e-12 * (1.0 + std::fabs(current));
        return want_smaller ? candidate < current - thr : candidate > current + thr;
    }

    bool solve_groups() {
        while (true) {
            if (!solve_alphas()) return false;
            bool changed = false;
            for (std::size_t p = 0; p < gsel_.size(); ++p) {
                double cur = group_value(p, gsel_[p]);
                std::uint32_t g = best_group(p);
                if (g != gsel_[p] && better(group_value(p, g), cur, true)) {
                    gsel_[p] = g;
                    pick_alpha(p, u_);
                    pick_leaf(p);
                    changed = true;
                }
            }
            if (!changed) return true;
        }
    }

    bool solve_alphas() {
        auto ao = op_.alpha_offsets();
        while (true) {
            if (!solve_leaves()) return false;
            bool changed = false;
            for (std::size_t p = 0; p < asel_.size(); ++p) {
                std::uint32_t g = gsel_[p];
                double cur = alpha_value(p, asel_[p]);
                std::uint32_t best = asel_[p];
                double bv = cur;
                for (std::uint32_t a = ao[g]; a < ao[g + 1]; ++a) {
                    double v = alpha_value(p, a);
                    if (v > bv) {
                        bv = v;
                        best = a;
                    }
                }
                if (best != asel_[p] && better(bv, cur, false)) {
                    asel_[p] = best;
                    pick_leaf(p);
                    changed = true;
                }
            }
            if (!changed) return true;
        }
    }

    bool solve_leaves() {
        auto lo = op_.leaf_offsets();
        while (true) {
            if (solves_ >= max_solves_) return false;
            linear_solve();
            ++solves_;
            bool changed = false;
            for (std::size_t p = 0; p < bsel_.size(); ++p) {
                std::uint32_t a = asel_[p];
                double cur = op_.leaf_value(p, bsel_[p], u_);
                std::uint32_t best = bsel_[p];
                double bv = cur;
                for (std::uint32_t l = lo[a]; l < lo[a + 1]; ++l) {
                    double v = op_.leaf_value(p, l, u_);
                    if (v < bv) {
                        bv = v;
                        best = l;
                    }
                }
                if (best != bsel_[p] && better(bv, cur, true)) {
                    bsel_[p] = best;
                    changed = true;
                }
            }
            if (!changed) return true;
        }
    }

    // Frozen policy: 2Σc u_p - Σ_interior c u_q = Σ_boundary c u_b + const - f.
    void linear_solve() {
        const std::size_t P = bsel_.size();
        auto eo = op_.entry_offsets();
        auto dirs = op_.entry_dirs();
        auto coefs = op_.entry_coefs();
        auto consts = op_.leaf_constants();
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(P * 9);
        Eigen::VectorXd b(static_cast<Eigen::Index>(P));
        for (std::size_t p = 0; p < P; ++p) {
            const std::uint32_t l = bsel_[p];
            double diag = 0.0;
            double rhs = op_.rhs(p) - consts[l];
            for (std::uint32_t e = eo[l]; e < eo[l + 1]; ++e) {
                const double c = coefs[e];
                diag += 2.0 * c;
                for (std::size_t q : {op_.plus(p, dirs[e]), op_.minus(p, dirs[e])}) {
                    std::int64_t s = slot_[q];
                    if (s >= 0) trip.emplace_back(static_cast<int>(p), static_cast<int>(s), -c);
                    else rhs -= c * u_[q];
                }
            }
            if (!(diag > 0.0)) throw Error("policy solver: frozen-control row without positive diagonal");
            trip.emplace_back(static_cast<int>(p), static_cast<int>(p), diag);
            b(static_cast<Eigen::Index>(p)) = -rhs;
        }
        Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        lu_.compute(A);
        if (lu_.info() != Eigen::Success) throw Error("policy solver: singular frozen-control system");
        Eigen::VectorXd x = lu_.solve(b);
        // Two rounds of iterative refinement keep the residual near rounding level on fine meshes.
        for (int r = 0; r < 2; ++r) {
            Eigen::VectorXd res = b - A * x;
            x += lu_.solve(res);
        }
        for (std::size_t p = 0; p < P; ++p) u_[op_.interior_index(p)] = x(static_cast<Eigen::Index>(p));
    }

    const DiscreteOperator& op_;
    std::vector<double>& u_;
    int max_solves_;
    int solves_ = 0;
    std::vector<std::int64_t> slot_;
    std::vector<std::uint32_t> gsel_, asel_, bsel_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

int relax(const DiscreteOperator& op, std::vector<double>& u, double tol, int max_iter) {
    const double tau = 0.9 / (2.0 * op.max_diagonal());
    std::vector<double> next = u;
    for (int it = 0; it < max_iter; ++it) {
        auto r = op.eval(u);
        double sup = 0.0;
        for (double v : r) sup = std::max(sup, std::fabs(v));
        if (sup <= tol) return it;
        for (std::size_t p = 0; p < r.size(); ++p) next[op.interior_index(p)] = u[op.interior_index(p)] + tau * r[p];
        std::swap(u, next);
    }
    return max_iter;
}

} // namespace

SolveResult solve_dirichlet(const DiscreteOperator& op, const std::vector<double>& boundary, const SolveOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solve_dirichlet: tol must be positive");
    const Mesh& mesh = op.mesh();
    if (boundary.size() != mesh.size()) throw std::invalid_argument("solve_dirichlet: boundary vector size mismatch");
    for (std::size_t b : mesh.boundary())
        if (!std::isfinite(boundary[b])) throw std::invalid_argument("solve_dirichlet: non-finite boundary value");

    auto start = Clock::now();
    std::vector<double> u;
    if (opts.initial) {
        if (opts.initial->size() != mesh.size()) throw std::invalid_argument("solve_dirichlet: initial guess size mismatch");
        u = *opts.initial;
        for (std::size_t b : mesh.boundary()) u[b] = boundary[b];
    } else {
        u = nearest_boundary_extension(mesh, boundary);
    }

    SolveReport rep;
    if (opts.method == SolveMethod::policy) {
        rep.method = "policy";
        PolicySolver solver(op, u, opts.max_iter);
        solver.run();
        rep.iterations = solver.solves();
    } else {
        rep.method = "relax";
        rep.iterations = relax(op, u, opts.tol, opts.max_iter);
    }
    rep.residual = op.residual(u);
    rep.converged = rep.residual <= opts.tol;
    rep.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
    return SolveResult{MeshFunction(op.mesh_ptr(), std::move(u)), rep};
}

SolveResult solve_dirichlet(const DiscreteOperator& op, const ScalarField& g, const SolveOptions& opts) {
    return solve_dirichlet(op, sample(op.mesh_ptr(), g).values(), opts);
}

ComparisonReport discrete_comparison_test(const DiscreteOperator& op, const MeshFunction& v1, const MeshFunction& v2,
                                          double tol) {
    ComparisonReport rep;
    rep.preconditions_ok = op.residual(v1.values()) <= tol && op.residual(v2.values()) <= tol;
    const Mesh& mesh = op.mesh();
    rep.boundary_ordered = true;
    for (std::size_t b : mesh.boundary())
        if (v1[b] > v2[b] + tol) rep.boundary_ordered = false;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.size(); ++i) rep.max_excess = std::max(rep.max_excess, v1[i] - v2[i]);
    rep.ordered = rep.max_excess <= tol;
    return rep;
}

HolderReport holder_norm(const MeshFunction& u, double eta, std::uint64_t cap, std::uint64_t seed) {
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("holder_norm: eta must lie in (0, 1]");
    const Mesh& mesh = u.mesh();
    const std::uint64_t M = mesh.size();
    const std::uint64_t total = M * (M - 1) / 2;
    HolderReport rep;
    auto ratio = [&](std::size_t i, std::size_t j) {
        double d = distance(mesh.point(i), mesh.point(j));
        return std::fabs(u[i] - u[j]) / std::pow(d, eta);
    };
    if (total <= cap) {
        rep.exact = true;
        rep.pairs = total;
        std::vector<double> best(M, 0.0);
        parallel_for(M, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i)
                for (std::size_t j = i + 1; j < M; ++j) best[i] = std::max(best[i], ratio(i, j));
        }, 32);
        for (double v : best) rep.value = std::max(rep.value, v);
    } else {
        rep.exact = false;
        rep.pairs = cap;
        auto rng = stream(seed, 0);
        std::uniform_int_distribution<std::size_t> pick(0, M - 1);
        for (std::uint64_t k = 0; k < cap; ++k) {
            std::size_t i = pick(rng), j = pick(rng);
            if (i != j) rep.value = std::max(rep.value, ratio(i, j));
        }
    }
    return rep;
}

} // namespace nonlin
