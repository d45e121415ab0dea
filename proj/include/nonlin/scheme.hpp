#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nonlin/fields.hpp"
#include "nonlin/mesh.hpp"
#include "nonlin/operators.hpp"
#include "nonlin/symmat.hpp"

namespace nonlin {

/// Primitive lattice directions v with 0 < |v| ≤ N, one per ±pair (first
/// nonzero component positive), ordered by |v|² and then by decreasing
/// lexicographic order, so the axes come first. The mesh direction is y = h v.
class Stencil {
  public:
    Stencil() = default;
    Stencil(int dim, int width);

    int dim() const { return dim_; }
    int width() const { return width_; }
    std::size_t size() const { return len_.size(); }
    std::span<const int> direction(std::size_t k) const {
        return {dirs_.data() + k * dim_, static_cast<std::size_t>(dim_)};
    }
    /// |v| (lattice units).
    double length(std::size_t k) const { return len_[k]; }
    /// ŷ ŷᵀ.
    const SymMat& projector(std::size_t k) const { return proj_[k]; }

  private:
    int dim_ = 0;
    int width_ = 0;
    std::vector<int> dirs_;
    std::vector<double> len_;
    std::vector<SymMat> proj_;
};

/// ω_y per stencil direction with Σ ω_y ŷŷᵀ ≈ a.
struct DirectionalWeights {
    std::vector<double> weights;
    double residual = 0.0; // Frobenius norm of a - Σ ω_y ŷŷᵀ
    bool exact(double tol = 1e-10) const { return residual <= tol; }
};

/// Nonnegative least squares (Lawson–Hanson active set) for the cone of the
/// stencil's rank-one directions. Never throws on a poor fit; the residual says.
DirectionalWeights decompose_matrix(const SymMat& a, const Stencil& stencil);

/// (u(x - y) - 2u(x) + u(x + y)) / |y|² with y = h v. Throws if x ± y is not a mesh point.
double delta_y2(const MeshFunction& u, std::size_t i, std::span<const int> v);

/// One linear piece Σ ω_k δ²_{y_k} u + c of a discrete game, with ω indexed
/// by stencil direction.
struct DiscreteLeaf {
    std::vector<std::pair<std::uint32_t, double>> terms; // (direction, ω)
    double c = 0.0;
};
using DiscreteAlpha = std::vector<DiscreteLeaf>;
using DiscreteGroup = std::vector<DiscreteAlpha>;
using DiscreteGame = std::vector<DiscreteGroup>;

/// F_h[u](x) = min_g max_α min_β { Σ ω_y δ²_y u(x) + c } - f(x) on interior
/// points. Immutable; evaluation is thread safe.
class DiscreteOperator {
  public:
    /// Builds from one game per interior point (in mesh.interior() order).
    /// Weights are taken as given, so hand-built non-monotone operators are possible.
    DiscreteOperator(MeshPtr mesh, Stencil stencil, const std::vector<DiscreteGame>& games,
                     std::vector<double> rhs);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    const Stencil& stencil() const { return stencil_; }
    std::size_t interior_count() const { return rhs_.size(); }
    std::size_t interior_index(std::size_t p) const { return mesh_->interior()[p]; }
    double rhs(std::size_t p) const { return rhs_[p]; }

    /// Source continuum problem (set by `assemble`).
    const std::optional<Nonlinearity>& nonlinearity() const { return F_; }
    const ScalarField& source() const { return f_; }
    /// Consistency constant: max over leaves of Σ ω_y |v_y| / 3.
    double consistency_constant() const { return K_; }
    /// max over leaves of Σ ω_y / |y|².
    double max_diagonal() const { return max_diag_; }

    /// F_h[u] at interior point p.
    double eval_point(std::size_t p, std::span<const double> u) const;
    /// F_h[u] at every interior point.
    std::vector<double> eval(std::span<const double> u) const;
    /// sup over interior points of |F_h[u]|.
    double residual(std::span<const double> u) const;

    // Flattened tables: point → groups → alphas → leaves → entries.
    std::span<const std::uint32_t> group_offsets() const { return point_group_; }
    std::span<const std::uint32_t> alpha_offsets() const { return group_alpha_; }
    std::span<const std::uint32_t> leaf_offsets() const { return alpha_leaf_; }
    std::span<const std::uint32_t> entry_offsets() const { return leaf_entry_; }
    std::span<const double> leaf_constants() const { return leaf_c_; }
    std::span<const std::uint32_t> entry_dirs() const { return entry_dir_; }
    /// ω / |y|² for each entry.
    std::span<const double> entry_coefs() const { return entry_coef_; }
    std::size_t plus(std::size_t p, std::size_t dir) const { return plus_[p * stencil_.size() + dir]; }
    std::size_t minus(std::size_t p, std::size_t dir) const { return minus_[p * stencil_.size() + dir]; }

    /// Σ coef (u⁺ + u⁻ - 2u) + c for leaf l at point p.
    double leaf_value(std::size_t p, std::size_t l, std::span<const double> u) const;

  private:
    friend DiscreteOperator assemble(const Nonlinearity&, const ScalarField&, const MeshPtr&);

    MeshPtr mesh_;
    Stencil stencil_;
    std::vector<double> rhs_;
    std::optional<Nonlinearity> F_;
    ScalarField f_;
    double K_ = 0.0;
    double max_diag_ = 0.0;
    std::vector<std::uint32_t> point_group_, group_alpha_, alpha_leaf_, leaf_entry_;
    std::vector<double> leaf_c_;
    std::vector<std::uint32_t> entry_dir_;
    std::vector<double> entry_coef_;
    std::vector<std::size_t> plus_, minus_;
};

/// Monotone scheme for F(D²u, x) = f(x) on the mesh's interior points. Throws
/// DecompositionError naming the point and a sufficient stencil width when a
/// coefficient matrix leaves the stencil's cone.
DiscreteOperator assemble(const Nonlinearity& F, const ScalarField& f, const MeshPtr& mesh);

struct MonotonicityReport {
    int trials = 0;
    int violations = 0;
    double worst = 0.0; // largest violation amount
};

/// Random trials of F_h(q + η, z) ≥ F_h(q, z) ≥ F_h(q + η, z + τ) with η ≥ 0,
/// τ ≥ max η and 1e-10 relative slack.
MonotonicityReport monotonicity_check(const DiscreteOperator& op, int trials, std::uint64_t seed);

struct ConsistencyReport {
    double max_discrepancy = 0.0;
    double bound = 0.0; // K (1 + ‖D³φ‖) h
    double K = 0.0;
    std::size_t worst_point = 0; // mesh index
    bool passed = false;
};

/// max over interior x of |F_h[φ](x) - (F(D²φ(x), x) - f(x))| against
/// K (1 + ‖D³φ‖∞) h. K <= 0 uses the operator's own constant.
ConsistencyReport consistency_check(const DiscreteOperator& op, const ScalarField& phi, double K = 0.0);

} // namespace nonlin
