#include "nonlin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "nonlin/simd/kernels.hpp"

namespace nonlin {

Domain Domain::box(Point lo, Point hi) {
    if (lo.empty() || lo.size() != hi.size()) throw std::invalid_argument("box: lo/hi dimension mismatch");
    for (std::size_t k = 0; k < lo.size(); ++k) {
        if (!(lo[k] < hi[k])) throw std::invalid_argument("box: empty interior along axis " + std::to_string(k));
    }
    return Domain(Kind::box, std::move(lo), std::move(hi), 0.0);
}

Domain Domain::ball(Point center, double radius) {
    if (center.empty()) throw std::invalid_argument("ball: empty center");
    if (!(radius > 0.0)) throw std::invalid_argument("ball: radius must be positive");
    return Domain(Kind::ball, std::move(center), {}, radius);
}

double Domain::diameter() const {
    if (kind_ == Kind::ball) return 2.0 * radius_;
    double s = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k) s += (b_[k] - a_[k]) * (b_[k] - a_[k]);
    return std::sqrt(s);
}

Point Domain::barycenter() const {
    if (kind_ == Kind::ball) return a_;
    Point c(a_.size());
    for (std::size_t k = 0; k < a_.size(); ++k) c[k] = 0.5 * (a_[k] + b_[k]);
    return c;
}

std::pair<double, double> Domain::axis_range(int axis) const {
    if (kind_ == Kind::ball) return {a_[axis] - radius_, a_[axis] + radius_};
    return {a_[axis], b_[axis]};
}

double Domain::max_abs() const {
    if (kind_ == Kind::ball) return norm(a_) + radius_;
    double s = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        double m = std::max(std::fabs(a_[k]), std::fabs(b_[k]));
        s += m * m;
    }
    return std::sqrt(s);
}

double Domain::signed_distance(std::span<const double> x) const {
    if (kind_ == Kind::ball) return radius_ - distance(x, a_);
    bool inside = true;
    double inner = std::numeric_limits<double>::infinity();
    double outer_sq = 0.0;
    for (std::size_t k = 0; k < a_.size(); ++k) {
        double lo = x[k] - a_[k];
        double hi = b_[k] - x[k];
        inner = std::min({inner, lo, hi});
        double excess = std::max({0.0, -lo, -hi});
        if (excess > 0.0) inside = false;
        outer_sq += excess * excess;
    }
    return inside ? inner : -std::sqrt(outer_sq);
}

bool Domain::contains(std::span<const double> x, double tol) const {
    if (static_cast<int>(x.size()) != dim()) return false;
    return signed_distance(x) >= -tol;
}

double distance_to_boundary(const Domain& domain, std::span<const double> x) {
    if (static_cast<int>(x.size()) != domain.dim()) throw std::invalid_argument("distance_to_boundary: dimension mismatch");
    double d = domain.signed_distance(x);
    double tol = 1e-12 * std::max(1.0, domain.diameter());
    if (d < -tol) throw std::domain_error("distance_to_boundary: point lies outside the domain");
    return std::max(0.0, d);
}

MeshPtr build_mesh(const Domain& domain, double h, int width) {
    if (!(h > 0.0)) throw std::invalid_argument("build_mesh: h must be positive");
    if (width < 1) throw std::invalid_argument("build_mesh: stencil width N must be >= 1");

    auto mesh = std::shared_ptr<Mesh>(new Mesh(domain));
    const int n = domain.dim();
    mesh->h_ = h;
    mesh->width_ = width;
    mesh->dim_ = n;

    // Points within 1e-12 h of the closed domain count as mesh points.
    const double tol = 1e-12 * h;
    mesh->box_lo_.resize(n);
    mesh->box_extent_.resize(n);
    std::size_t slots = 1;
    for (int k = 0; k < n; ++k) {
        auto [lo, hi] = domain.axis_range(k);
        auto ilo = static_cast<std::int64_t>(std::ceil((lo - tol) / h));
        auto ihi = static_cast<std::int64_t>(std::floor((hi + tol) / h));
        if (ihi < ilo) throw DegenerateMeshError("degenerate mesh: no lattice points inside the domain");
        mesh->box_lo_[k] = ilo;
        mesh->box_extent_[k] = ihi - ilo + 1;
        slots *= static_cast<std::size_t>(mesh->box_extent_[k]);
    }

    mesh->slot_table_.assign(slots, -1);
    std::vector<std::int64_t> idx(n);
    Point x(n);
    for (std::size_t s = 0; s < slots; ++s) {
        std::size_t rem = s;
        for (int k = n - 1; k >= 0; --k) {
            auto e = static_cast<std::size_t>(mesh->box_extent_[k]);
            idx[k] = mesh->box_lo_[k] + static_cast<std::int64_t>(rem % e);
            rem /= e;
        }
        for (int k = 0; k < n; ++k) x[k] = static_cast<double>(idx[k]) * h;
        if (!domain.contains(x, tol)) continue;
        mesh->slot_table_[s] = static_cast<std::int64_t>(mesh->dist_.size());
        mesh->slot_of_point_.push_back(s);
        mesh->lattice_.insert(mesh->lattice_.end(), idx.begin(), idx.end());
        mesh->coords_.insert(mesh->coords_.end(), x.begin(), x.end());
        double d = std::max(0.0, domain.signed_distance(x));
        mesh->dist_.push_back(d);
        // Strict d > Nh; the relative guard keeps exact ties (d == Nh in real
        // arithmetic) on the boundary side despite rounding in x = i*h.
        bool interior = d > width * h + tol;
        mesh->interior_mask_.push_back(interior ? 1 : 0);
    }

    for (std::size_t i = 0; i < mesh->dist_.size(); ++i) {
        (mesh->interior_mask_[i] ? mesh->interior_ : mesh->boundary_).push_back(i);
    }
    if (mesh->interior_.empty()) {
        std::ostringstream os;
        os << "degenerate mesh: no point has d(x, boundary) > N*h (h=" << h << ", N=" << width << ")";
        throw DegenerateMeshError(os.str());
    }
    return mesh;
}

std::optional<std::size_t> Mesh::find(std::span<const std::int64_t> lattice) const {
    std::size_t slot = 0;
    for (int k = 0; k < dim_; ++k) {
        std::int64_t off = lattice[k] - box_lo_[k];
        if (off < 0 || off >= box_extent_[k]) return std::nullopt;
        slot = slot * static_cast<std::size_t>(box_extent_[k]) + static_cast<std::size_t>(off);
    }
    std::int64_t p = slot_table_[slot];
    if (p < 0) return std::nullopt;
    return static_cast<std::size_t>(p);
}

std::optional<std::size_t> Mesh::shifted(std::size_t i, std::span<const int> step) const {
    std::int64_t buf[8];
    std::vector<std::int64_t> big;
    std::int64_t* q = buf;
    if (dim_ > 8) {
        big.resize(dim_);
        q = big.data();
    }
    auto base = lattice(i);
    for (int k = 0; k < dim_; ++k) q[k] = base[k] + step[k];
    return find({q, static_cast<std::size_t>(dim_)});
}

std::size_t Mesh::nearest(std::span<const double> x) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i) {
        double d = distance_sq(point(i), x);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> eroded_points(const Mesh& mesh, double margin) {
    if (margin < 0.0) throw std::invalid_argument("eroded_points: margin must be >= 0");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (mesh.distance(i) > margin) out.push_back(i);
    return out;
}

MeshFunction::MeshFunction(MeshPtr mesh) : mesh_(std::move(mesh)), values_(mesh_->size(), 0.0) {}

MeshFunction::MeshFunction(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (values_.size() != mesh_->size()) throw std::invalid_argument("MeshFunction: value count does not match mesh");
}

MeshFunction MeshFunction::sample(MeshPtr mesh, const std::function<double(std::span<const double>)>& fn) {
    std::vector<double> v(mesh->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(mesh->point(i));
    return MeshFunction(std::move(mesh), std::move(v));
}

double MeshFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
}

double sup_distance(const MeshFunction& a, const MeshFunction& b) {
    if (a.size() != b.size()) throw std::invalid_argument("sup_distance: size mismatch");
    return simd::max_abs_diff(a.values().data(), b.values().data(), a.size());
}

} // namespace nonlin
