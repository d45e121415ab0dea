#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "nonlin/common.hpp"

namespace nonlin {

/// Bounded domain: an axis-aligned box or a Euclidean ball. Both have regular
/// boundary, so distances to the boundary are available in closed form.
class Domain {
  public:
    enum class Kind { box, ball };

    static Domain box(Point lo, Point hi);
    static Domain ball(Point center, double radius);

    Kind kind() const { return kind_; }
    int dim() const { return static_cast<int>(a_.size()); }

    const Point& lo() const { return a_; }     // box only
    const Point& hi() const { return b_; }     // box only
    const Point& center() const { return a_; } // ball only
    double radius() const { return radius_; }  // ball only

    double diameter() const;
    Point barycenter() const;
    /// Coordinate range of the closure along `axis`.
    std::pair<double, double> axis_range(int axis) const;
    /// Largest |x| over the closure.
    double max_abs() const;

    bool contains(std::span<const double> x, double tol = 0.0) const;
    /// Signed distance: positive inside, negative outside.
    double signed_distance(std::span<const double> x) const;

  private:
    Domain(Kind kind, Point a, Point b, double radius)
        : kind_(kind), a_(std::move(a)), b_(std::move(b)), radius_(radius) {}

    Kind kind_;
    Point a_;
    Point b_;
    double radius_ = 0.0;
};

/// Exact Euclidean distance from `x` to the boundary of `domain`. Points that
/// lie outside by more than a rounding tolerance are rejected.
double distance_to_boundary(const Domain& domain, std::span<const double> x);

/// Lattice U ∩ hZⁿ with the interior/boundary split U_h^i = {d(x, ∂U) > Nh}.
///
/// Points are ordered lexicographically on their integer lattice coordinates
/// (axis 0 most significant). Immutable after construction.
class Mesh {
  public:
    const Domain& domain() const { return domain_; }
    double h() const { return h_; }
    int width() const { return width_; }
    int dim() const { return dim_; }
    std::size_t size() const { return dist_.size(); }

    std::span<const double> point(std::size_t i) const {
        return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    std::span<const std::int64_t> lattice(std::size_t i) const {
        return {lattice_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& coords() const { return coords_; }
    double distance(std::size_t i) const { return dist_[i]; }
    bool is_interior(std::size_t i) const { return interior_mask_[i] != 0; }

    const std::vector<std::size_t>& interior() const { return interior_; }
    const std::vector<std::size_t>& boundary() const { return boundary_; }

    std::optional<std::size_t> find(std::span<const std::int64_t> lattice) const;
    /// Index of lattice(i) + step, or nullopt when that point is not in the mesh.
    std::optional<std::size_t> shifted(std::size_t i, std::span<const int> step) const;
    /// Mesh point closest to `x` (ties broken by index).
    std::size_t nearest(std::span<const double> x) const;

    /// Dense bounding-box layout of the lattice: lower corner and extents.
    const std::vector<std::int64_t>& box_lo() const { return box_lo_; }
    const std::vector<std::int64_t>& box_extent() const { return box_extent_; }
    /// Bounding-box slot of every mesh point (row-major, last axis fastest).
    std::size_t box_slot(std::size_t i) const { return slot_of_point_[i]; }
    /// Mesh index stored in a bounding-box slot, or -1.
    std::int64_t point_at_slot(std::size_t slot) const { return slot_table_[slot]; }

  private:
    friend std::shared_ptr<const Mesh> build_mesh(const Domain&, double, int);
    explicit Mesh(Domain domain) : domain_(std::move(domain)) {}

    Domain domain_;
    double h_ = 0.0;
    int width_ = 1;
    int dim_ = 0;
    std::vector<std::int64_t> lattice_;
    std::vector<double> coords_;
    std::vector<double> dist_;
    std::vector<char> interior_mask_;
    std::vector<std::size_t> interior_;
    std::vector<std::size_t> boundary_;
    std::vector<std::int64_t> box_lo_;
    std::vector<std::int64_t> box_extent_;
    std::vector<std::int64_t> slot_table_;
    std::vector<std::size_t> slot_of_point_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Throws std::invalid_argument for h <= 0 or N < 1 and DegenerateMeshError
/// when no point satisfies d(x, ∂U) > Nh.
MeshPtr build_mesh(const Domain& domain, double h, int width);

/// Mesh points with d(x, ∂U) > margin, in mesh order.
std::vector<std::size_t> eroded_points(const Mesh& mesh, double margin);

/// One real value per mesh point.
class MeshFunction {
  public:
    MeshFunction() = default;
    explicit MeshFunction(MeshPtr mesh);
    MeshFunction(MeshPtr mesh, std::vector<double> values);

    static MeshFunction sample(MeshPtr mesh, const std::function<double(std::span<const double>)>& fn);

    const Mesh& mesh() const { return *mesh_; }
    const MeshPtr& mesh_ptr() const { return mesh_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    double sup_norm() const;

  private:
    MeshPtr mesh_;
    std::vector<double> values_;
};

/// sup |a - b| over all mesh points.
double sup_distance(const MeshFunction& a, const MeshFunction& b);

} // namespace nonlin
