#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nonlin/fields.hpp"
#include "nonlin/mesh.hpp"
#include "nonlin/scheme.hpp"

namespace nonlin {

enum class SolveMethod { policy, relax };

struct SolveOptions {
    SolveMethod method = SolveMethod::policy;
    double tol = 1e-10;
    int max_iter = 200;
    /// Interior starting values (full mesh-size vector); default is the
    /// nearest-boundary-value extension.
    std::optional<std::vector<double>> initial;
};

struct SolveReport {
    std::string method;
    int iterations = 0;
    double residual = 0.0; // sup over interior points of |F_h[v]|, recomputed after the solve
    double elapsed_s = 0.0;
    bool converged = false; // residual <= tol
};

struct SolveResult {
    MeshFunction v;
    SolveReport report;
};

/// F_h[v] = 0 on interior points, v = g on boundary points.
/// Policy: nested Howard iteration (group min, control max, control min) with
/// sparse LU solves of the frozen-policy M-matrix systems. Relax: explicit
/// Jacobi-style v ← v + τ F_h[v], τ = 0.9 / (2 max Σ ω/|y|²).
SolveResult solve_dirichlet(const DiscreteOperator& op, const ScalarField& g, const SolveOptions& opts = {});
/// Boundary values taken from `boundary` (mesh-size vector; interior entries ignored).
SolveResult solve_dirichlet(const DiscreteOperator& op, const std::vector<double>& boundary,
                            const SolveOptions& opts = {});

struct ComparisonReport {
    bool preconditions_ok = false; // both inputs solve F_h = 0 within tol
    bool boundary_ordered = false; // v1 <= v2 + tol on boundary points
    bool ordered = false;          // v1 <= v2 + tol everywhere
    double max_excess = 0.0;       // max (v1 - v2)
    /// boundary_ordered ⇒ ordered (vacuously true when boundary is not ordered).
    bool holds() const { return !boundary_ordered || ordered; }
};

ComparisonReport discrete_comparison_test(const DiscreteOperator& op, const MeshFunction& v1,
                                          const MeshFunction& v2, double tol = 1e-9);

struct HolderReport {
    double value = 0.0;
    bool exact = true; // false when a random pair subsample was used
    std::uint64_t pairs = 0;
};

/// sup |u(x) - u(y)| / |x - y|^η over point pairs (exhaustive when the pair
/// count is at most `cap`, otherwise `cap` seeded random pairs).
HolderReport holder_norm(const MeshFunction& u, double eta, std::uint64_t cap = 2'000'000, std::uint64_t seed = 0);

} // namespace nonlin
