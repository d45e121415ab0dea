#pragma once

#include <optional>
#include <vector>

#include "nonlin/mesh.hpp"

namespace nonlin {

enum class ConvolutionKind { sup, inf };

/// v^{θ,±} evaluated on a point set, with the mesh point that attains the
/// extremum at each evaluation point.
struct ConvolvedFunction {
    MeshFunction source;
    double theta = 0.0;
    ConvolutionKind kind = ConvolutionKind::sup;
    std::vector<Point> points;         // evaluation points
    std::vector<double> values;        // one per evaluation point
    std::vector<std::size_t> witness;  // mesh index of x*
    bool on_mesh = false;              // points are the mesh points in mesh order

    /// Requires on_mesh.
    MeshFunction as_mesh_function() const;
};

/// v(y) - |x - y|² / (2θ) with the penalty subtracted axis by axis from the
/// last axis down to axis 0. Every convolution path uses exactly this arithmetic.
double penalized(double value, std::span<const double> x, std::span<const double> y, double theta);

/// sup_y { v(y) - |x - y|²/(2θ) } at every mesh point (separable fast path).
ConvolvedFunction sup_convolve(const MeshFunction& v, double theta);
/// inf_y { v(y) + |x - y|²/(2θ) } at every mesh point (separable fast path).
ConvolvedFunction inf_convolve(const MeshFunction& v, double theta);
/// Brute force over all mesh points at arbitrary evaluation points.
ConvolvedFunction sup_convolve(const MeshFunction& v, double theta, const std::vector<Point>& points);
ConvolvedFunction inf_convolve(const MeshFunction& v, double theta, const std::vector<Point>& points);
/// Brute force at every mesh point; the oracle for the fast path.
ConvolvedFunction convolve_brute_force(const MeshFunction& v, double theta, ConvolutionKind kind);

struct PropertyReport {
    std::size_t checked = 0;
    std::size_t violations = 0;
    double worst = 0.0; // largest observed quantity (gap, difference, or violation amount)
    double bound = 0.0;
    bool ok() const { return violations == 0; }
};

/// δ²_y c ≥ -1/θ (sup kind; ≤ 1/θ for inf kind) at every interior point and
/// stencil direction, with 1e-9 slack. `worst` is the largest violation.
PropertyReport semiconvexity_check(const ConvolvedFunction& c, const Mesh& mesh);
/// |x - x*| ≤ 4 ‖v‖^{1/2} θ^{1/2} + √n h, and, when `lip` is given,
/// |x - x*| ≤ 2θ lip + √n h. `worst` is the largest gap.
PropertyReport magic_point_gap(const ConvolvedFunction& c, std::optional<double> lip = std::nullopt);
/// 0 ≤ ±(c - v) ≤ max(2 lip, lip²/2) θ + lip √n h at every mesh point. Requires on_mesh.
PropertyReport closeness_check(const ConvolvedFunction& c, double lip);

} // namespace nonlin
