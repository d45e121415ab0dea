#include "nonlin/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nonlin/parallel.hpp"
#include "nonlin/scheme.hpp"
#include "nonlin/simd/kernels.hpp"

namespace nonlin {

MeshFunction ConvolvedFunction::as_mesh_function() const {
    if (!on_mesh) throw std::logic_error("ConvolvedFunction: not evaluated on the mesh");
    return MeshFunction(source.mesh_ptr(), values);
}

double penalized(double value, std::span<const double> x, std::span<const double> y, double theta) {
    const double two_theta = 2.0 * theta;
    double acc = value;
    for (int k = static_cast<int>(x.size()) - 1; k >= 0; --k) {
        double d = x[k] - y[k];
        acc = acc - (d * d) / two_theta;
    }
    return acc;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_theta(double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("convolution: theta must be positive");
}

ConvolvedFunction brute(const MeshFunction& v, double theta, ConvolutionKind kind, std::vector<Point> points,
                        bool on_mesh) {
    check_theta(theta);
    const Mesh& mesh = v.mesh();
    const int n = mesh.dim();
    const double sign = kind == ConvolutionKind::sup ? 1.0 : -1.0;
    std::vector<double> vals(mesh.size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = sign * v[i];
    std::vector<std::vector<double>> axes(n, std::vector<double>(mesh.size()));
    std::vector<const double*> axis_ptr(n);
    for (int k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < mesh.size(); ++i) axes[k][i] = mesh.point(i)[k];
        axis_ptr[k] = axes[k].data();
    }
    simd::Candidates cand{vals.data(), axis_ptr.data(), mesh.size(), n};

    ConvolvedFunction c{v, theta, kind, std::move(points), {}, {}, on_mesh};
    c.values.resize(c.points.size());
    c.witness.resize(c.points.size());
    const double two_theta = 2.0 * theta;
    parallel_for(c.points.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            if (static_cast<int>(c.points[i].size()) != n) throw std::invalid_argument("convolution: point dimension mismatch");
            auto r = simd::penalized_argmax(cand, c.points[i].data(), two_theta);
            c.values[i] = sign * r.value;
            c.witness[i] = r.index;
        }
    }, 16);
    return c;
}

std::vector<Point> mesh_points(const Mesh& mesh) {
    std::vector<Point> pts(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) pts[i].assign(mesh.point(i).begin(), mesh.point(i).end());
    return pts;
}

// Separable passes over the bounding-box grid, last axis first. Each line
// pass is an exact 1D penalized max, and fl(a - t) is monotone in a, so the
// values agree bit for bit with the brute-force scan.
ConvolvedFunction separable(const MeshFunction& v, double theta, ConvolutionKind kind) {
    check_theta(theta);
    const Mesh& mesh = v.mesh();
    const int n = mesh.dim();
    const double h = mesh.h();
    const double sign = kind == ConvolutionKind::sup ? 1.0 : -1.0;
    const auto& lo = mesh.box_lo();
    const auto& ext = mesh.box_extent();
    std::size_t slots = 1;
    for (int k = 0; k < n; ++k) slots *= static_cast<std::size_t>(ext[k]);
    std::vector<std::size_t> stride(n, 1);
    for (int k = n - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<std::size_t>(ext[k + 1]);

    std::vector<double> grid(slots, kNegInf), next(slots);
    // Witness as box offsets per axis; -1 marks "no candidate".
    std::vector<std::int64_t> wit(slots * n, -1), next_wit(slots * n);
    for (std::size_t s = 0; s < slots; ++s) {
        std::size_t rem = s;
        for (int k = n - 1; k >= 0; --k) {
            wit[s * n + k] = static_cast<std::int64_t>(rem % static_cast<std::size_t>(ext[k]));
            rem /= static_cast<std::size_t>(ext[k]);
        }
    }
    for (std::size_t i = 0; i < mesh.size(); ++i) grid[mesh.box_slot(i)] = sign * v[i];

    const double two_theta = 2.0 * theta;
    for (int k = n - 1; k >= 0; --k) {
        const auto L = static_cast<std::size_t>(ext[k]);
        const std::size_t lines = slots / L;
        std::vector<double> coord(L);
        for (std::size_t j = 0; j < L; ++j) coord[j] = static_cast<double>(lo[k] + static_cast<std::int64_t>(j)) * h;
        parallel_for(lines, [&](std::size_t b, std::size_t e) {
            std::vector<double> line(L);
            const double* axis = coord.data();
            for (std::size_t li = b; li < e; ++li) {
                // Line start: decompose li over the other axes.
                std::size_t base = (li / stride[k]) * stride[k] * L + (li % stride[k]);
                for (std::size_t j = 0; j < L; ++j) line[j] = grid[base + j * stride[k]];
                simd::Candidates cand{line.data(), &axis, L, 1};
                for (std::size_t i = 0; i < L; ++i) {
                    auto r = simd::penalized_argmax(cand, &coord[i], two_theta);
                    std::size_t out = base + i * stride[k];
                    next[out] = r.value;
                    if (r.index == simd::npos) {
                        for (int a = 0; a < n; ++a) next_wit[out * n + a] = -1;
                    } else {
                        std::size_t src = base + r.index * stride[k];
                        for (int a = 0; a < n; ++a) next_wit[out * n + a] = wit[src * n + a];
                        next_wit[out * n + k] = static_cast<std::int64_t>(r.index);
                    }
                }
            }
        }, 8);
        std::swap(grid, next);
        std::swap(wit, next_wit);
    }

    ConvolvedFunction c{v, theta, kind, mesh_points(mesh), {}, {}, true};
    c.values.resize(mesh.size());
    c.witness.resize(mesh.size());
    std::vector<std::int64_t> lat(n);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        std::size_t s = mesh.box_slot(i);
        c.values[i] = sign * grid[s];
        for (int a = 0; a < n; ++a) lat[a] = lo[a] + wit[s * n + a];
        auto w = mesh.find(lat);
        if (!w) throw std::logic_error("separable convolution: witness is not a mesh point");
        c.witness[i] = *w;
    }
    return c;
}

} // namespace

ConvolvedFunction sup_convolve(const MeshFunction& v, double theta) {
    return separable(v, theta, ConvolutionKind::sup);
}

ConvolvedFunction inf_convolve(const MeshFunction& v, double theta) {
    return separable(v, theta, ConvolutionKind::inf);
}

ConvolvedFunction sup_convolve(const MeshFunction& v, double theta, const std::vector<Point>& points) {
    return brute(v, theta, ConvolutionKind::sup, points, false);
}

ConvolvedFunction inf_convolve(const MeshFunction& v, double theta, const std::vector<Point>& points) {
    return brute(v, theta, ConvolutionKind::inf, points, false);
}

ConvolvedFunction convolve_brute_force(const MeshFunction& v, double theta, ConvolutionKind kind) {
    return brute(v, theta, kind, mesh_points(v.mesh()), true);
}

PropertyReport semiconvexity_check(const ConvolvedFunction& c, const Mesh& mesh) {
    if (!c.on_mesh) throw std::invalid_argument("semiconvexity_check: convolution must be evaluated on the mesh");
    MeshFunction u = c.as_mesh_function();
    Stencil stencil(mesh.dim(), mesh.width());
    const double sign = c.kind == ConvolutionKind::sup ? 1.0 : -1.0;
    PropertyReport rep;
    rep.bound = -1.0 / c.theta;
    for (std::size_t i : mesh.interior()) {
        for (std::size_t d = 0; d < stencil.size(); ++d) {
            double q = sign * delta_y2(u, i, stencil.direction(d));
            ++rep.checked;
            double miss = rep.bound - q;
            if (miss > 1e-9 * (1.0 + 1.0 / c.theta)) {
                ++rep.violations;
                rep.worst = std::max(rep.worst, miss);
            }
        }
    }
    return rep;
}

PropertyReport magic_point_gap(const ConvolvedFunction& c, std::optional<double> lip) {
    const Mesh& mesh = c.source.mesh();
    const double slack = std::sqrt(double(mesh.dim())) * mesh.h();
    PropertyReport rep;
    rep.bound = 4.0 * std::sqrt(c.source.sup_norm()) * std::sqrt(c.theta) + slack;
    if (lip) rep.bound = std::min(rep.bound, 2.0 * c.theta * *lip + slack);
    for (std::size_t i = 0; i < c.points.size(); ++i) {
        ++rep.checked;
        if (c.witness[i] == simd::npos) {
            ++rep.violations;
            continue;
        }
        double gap = distance(c.points[i], mesh.point(c.witness[i]));
        rep.worst = std::max(rep.worst, gap);
        if (gap > rep.bound * (1.0 + 1e-12)) ++rep.violations;
    }
    return rep;
}

PropertyReport closeness_check(const ConvolvedFunction& c, double lip) {
    if (!c.on_mesh) throw std::invalid_argument("closeness_check: convolution must be evaluated on the mesh");
    const Mesh& mesh = c.source.mesh();
    const double sign = c.kind == ConvolutionKind::sup ? 1.0 : -1.0;
    PropertyReport rep;
    // sup_t (lip t - t²/(2θ)) = lip²θ/2 exceeds 2 lip θ once lip > 4.
    rep.bound = std::max(2.0 * lip, 0.5 * lip * lip) * c.theta + lip * std::sqrt(double(mesh.dim())) * mesh.h();
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        ++rep.checked;
        double diff = sign * (c.values[i] - c.source[i]);
        rep.worst = std::max(rep.worst, diff);
        if (diff < 0.0 || diff > rep.bound + 1e-12 * (1.0 + std::fabs(c.source[i]))) ++rep.violations;
    }
    return rep;
}

} // namespace nonlin
