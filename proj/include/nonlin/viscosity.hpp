#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nonlin/fields.hpp"
#include "nonlin/mesh.hpp"
#include "nonlin/operators.hpp"
#include "nonlin/symmat.hpp"

namespace nonlin {

/// P(x) = c + b·(x - x0) + ½ (x - x0)ᵀ M (x - x0).
struct Paraboloid {
    Point x0;
    double c = 0.0;
    Point b;
    SymMat M;

    double eval(std::span<const double> x) const;
};

enum class TouchSide { below, above };

struct TouchCertificate {
    Paraboloid paraboloid;   // anchored at the touch point
    std::size_t touch = 0;   // mesh index of x'
    TouchSide side = TouchSide::below;
    double delta = 0.0;
    double residual_min = 0.0; // min of (P - v) over the open ball B_δ(x') ∩ mesh
    double residual_max = 0.0; // max of (P - v) over the same points
};

struct TouchResult {
    std::optional<TouchCertificate> certificate;
    std::string rejection; // empty when accepted
};

/// Slides the shape b·(y - x) + ½(y - x)ᵀM(y - x) vertically until it touches
/// v from the given side over the open ball B_δ(x) ∩ mesh, then re-centres
/// the ball on the touch point (at most 5 rounds) until the touch point is
/// the centre. Rejects when no fixed point is reached or the ball around the
/// touch point leaves the admissible set d(x', ∂U) > margin (margin < 0 means δ).
TouchResult touch(const MeshFunction& v, std::span<const double> b, const SymMat& M, std::size_t x, double delta,
                  TouchSide side, double margin = -1.0);

/// Re-checks a certificate against raw mesh values: P - v has the right sign
/// on the ball and vanishes at the touch point (within `tol`).
bool verify_certificate(const MeshFunction& v, const TouchCertificate& cert, double tol = 1e-12);

/// G(X, x) = F(X, x) - f(x).
struct OperatorWithRhs {
    Nonlinearity F;
    ScalarField f;
    double operator()(const SymMat& X, std::span<const double> x) const { return F.eval(X, x) - f.value(x); }
};

struct DeltaCheckOptions {
    bool check_super = true; // below-touches: G(D²P, x') ≤ slack
    bool check_sub = true;   // above-touches: G(D²P, x') ≥ -slack
    double margin = -1.0;    // admissible set d(x, ∂U) > margin; < 0 means δ
    double grad_cap = -1.0;  // < 0 means 10 · (discrete Lipschitz estimate of v) + 1
};

struct DeltaReport {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t violations = 0;
    double worst_margin = 0.0; // min over accepted samples of slack ∓ G (negative means violation)
    std::uint64_t seed = 0;
    double M_max = 0.0;
    double grad_cap = 0.0;
    double delta = 0.0;
    double slack = 0.0;
    std::size_t samples = 0;
    bool inconclusive() const { return accepted == 0; }
    std::string to_json() const;
};

/// Statistical δ-sub/supersolution test over random paraboloid shapes with
/// ‖M‖ ≤ M_max. Samples are independent and seeded per index.
DeltaReport delta_solution_check(const MeshFunction& v, const OperatorWithRhs& G, double delta, std::size_t samples,
                                 double M_max, double slack, std::uint64_t seed, const DeltaCheckOptions& opts = {});

struct SlidingResult {
    std::size_t x0 = 0;  // mesh index
    Point point;         // coordinates of x0
    double l0 = 0.0;     // l(x0) = w(x0)
    Point slope;         // l(x) = l0 + slope·(x - x0)
    double R = 0.0;      // diam U
    Point y;
    double m = 0.0;
    double eval_l(std::span<const double> x) const;
};

/// x0 = argmin over mesh of -m/(2R²)|x - y|² - w(x), l(x) = w(x0) - (m/R²)⟨x - x0, x0 - y⟩.
/// Throws std::invalid_argument for m ≤ 0, m > sup w, or w > 0 on a mesh
/// point lying on ∂U. `y` defaults to the barycenter.
SlidingResult sliding_paraboloid(const MeshFunction& w, double m, std::optional<Point> y = std::nullopt);

struct SlidingCheck {
    double upper_bound_excess = 0.0; // max of w - (l - m/(2R²)|x - x0|²)
    double value_ratio = 0.0;        // w(x0) / m
    double distance = 0.0;           // d(x0, ∂U)
    double distance_bound = 0.0;     // (m / (2 ⌈w⌉_η))^{1/η}
    bool upper_ok = false, value_ok = false, distance_ok = false;
    bool ok() const { return upper_ok && value_ok && distance_ok; }
};

SlidingCheck check_sliding(const MeshFunction& w, const SlidingResult& r, double holder_seminorm, double eta,
                           double tol = 1e-9);

struct ConcaveEnvelope {
    MeshFunction envelope;
    std::vector<std::size_t> contact; // mesh indices where envelope == u within 1e-10
};

/// Least concave majorant over the mesh point cloud (dimension 1 or 2).
ConcaveEnvelope concave_envelope(const MeshFunction& u);

/// Σ over contact points with u > 0 of the measure of the superdifferential of
/// the envelope (slope intervals in 1D, clipped polygons in 2D).
double monge_ampere_mass(const MeshFunction& u, const ConcaveEnvelope& env);

struct DoublingResult {
    std::size_t x_a = 0, y_a = 0;
    double value = 0.0;
    double gap = 0.0;           // |x_a - y_a|
    double boundary_sup = 0.0;  // sup over pairs with x or y on ∂U
    std::optional<double> gap_bound, boundary_bound;
    bool gap_ok = true, boundary_ok = true;
};

/// max over mesh pairs of v(x) - w(y) - (a/2)|x - y|², exhaustive. Bounds are
/// checked when Lipschitz constants are supplied. Throws for meshes above 10⁴ points.
DoublingResult doubling_gap(const MeshFunction& v, const MeshFunction& w, double a,
                            std::optional<double> lip_v = std::nullopt, std::optional<double> lip_w = std::nullopt);

} // namespace nonlin
