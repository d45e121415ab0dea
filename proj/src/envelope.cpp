#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "nonlin/parallel.hpp"
#include "nonlin/viscosity.hpp"

namespace nonlin {

namespace {

constexpr double kContactTol = 1e-10;

std::vector<double> envelope_1d(const Mesh& mesh, const std::vector<double>& u) {
    const std::size_t M = mesh.size();
    // Mesh order is increasing in x for n = 1.
    std::vector<std::size_t> hull;
    auto x = [&](std::size_t i) { return mesh.point(i)[0]; };
    for (std::size_t i = 0; i < M; ++i) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2], b = hull.back();
            // Drop b when it lies on or below the chord a-i.
            double cross = (x(b) - x(a)) * (u[i] - u[a]) - (u[b] - u[a]) * (x(i) - x(a));
            if (cross >= 0.0) hull.pop_back();
            else break;
        }
        hull.push_back(i);
    }
    std::vector<double> env(M);
    std::size_t seg = 0;
    for (std::size_t i = 0; i < M; ++i) {
        while (seg + 1 < hull.size() && hull[seg + 1] < i) ++seg;
        std::size_t a = hull[seg];
        if (a == i || seg + 1 >= hull.size()) {
            env[i] = std::max(u[i], u[a]);
            continue;
        }
        std::size_t b = hull[seg + 1];
        double t = (x(i) - x(a)) / (x(b) - x(a));
        env[i] = std::max(u[i], u[a] + t * (u[b] - u[a]));
    }
    return env;
}

// max Σλ_j u_j  s.t.  Σλ_j = 1, Σλ_j x_j = x, λ ≥ 0 (revised simplex, Bland's rule).
class EnvelopeLP {
  public:
    EnvelopeLP(const Mesh& mesh, const std::vector<double>& u) : mesh_(mesh), u_(u) {}

    double solve(std::size_t target) const {
        const std::size_t M = mesh_.size();
        auto xt = mesh_.point(target);
        std::array<double, 3> rhs{1.0, xt[0], xt[1]};
        std::array<std::size_t, 3> basis{target, 0, 0};
        if (!initial_basis(target, basis)) return u_[target];
        std::array<double, 9> B{}, Binv{};
        std::array<double, 3> xb{};

        for (int iter = 0; iter < 10000; ++iter) {
            for (int r = 0; r < 3; ++r) {
                auto c = column(basis[r]);
                for (int k = 0; k < 3; ++k) B[k * 3 + r] = c[k];
            }
            if (!invert(B, Binv)) return u_[target];
            for (int k = 0; k < 3; ++k) xb[k] = Binv[k * 3] * rhs[0] + Binv[k * 3 + 1] * rhs[1] + Binv[k * 3 + 2] * rhs[2];
            std::array<double, 3> pi{};
            for (int c = 0; c < 3; ++c)
                for (int r = 0; r < 3; ++r) pi[c] += u_[basis[r]] * Binv[r * 3 + c];

            std::size_t enter = M;
            for (std::size_t j = 0; j < M; ++j) {
                if (j == basis[0] || j == basis[1] || j == basis[2]) continue;
                auto c = column(j);
                double reduced = u_[j] - (pi[0] * c[0] + pi[1] * c[1] + pi[2] * c[2]);
                if (reduced > 1e-12 * (1.0 + std::fabs(u_[j]))) {
                    enter = j;
                    break;
                }
            }
            if (enter == M) break;

            auto c = column(enter);
            std::array<double, 3> d{};
            for (int k = 0; k < 3; ++k) d[k] = Binv[k * 3] * c[0] + Binv[k * 3 + 1] * c[1] + Binv[k * 3 + 2] * c[2];
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 3; ++k) {
                if (d[k] <= 1e-12) continue;
                double ratio = std::max(0.0, xb[k]) / d[k];
                if (ratio < best - 1e-15 || (std::fabs(ratio - best) <= 1e-15 && leave >= 0 && basis[k] < basis[leave])) {
                    best = ratio;
                    leave = k;
                }
            }
            if (leave < 0) break; // unbounded cannot happen for a bounded point cloud
            basis[leave] = enter;
        }
        double val = 0.0;
        for (int k = 0; k < 3; ++k) val += std::max(0.0, xb[k]) * u_[basis[k]];
        return std::max(val, u_[target]);
    }

  private:
    std::array<double, 3> column(std::size_t j) const {
        auto p = mesh_.point(j);
        return {1.0, p[0], p[1]};
    }

    bool initial_basis(std::size_t target, std::array<std::size_t, 3>& basis) const {
        const std::size_t M = mesh_.size();
        auto t = mesh_.point(target);
        std::size_t a = M;
        for (std::size_t j = 0; j < M && a == M; ++j)
            if (j != target) a = j;
        if (a == M) return false;
        auto pa = mesh_.point(a);
        for (std::size_t j = 0; j < M; ++j) {
            if (j == target || j == a) continue;
            auto pb = mesh_.point(j);
            double cross = (pa[0] - t[0]) * (pb[1] - t[1]) - (pa[1] - t[1]) * (pb[0] - t[0]);
            if (std::fabs(cross) > 1e-12) {
                basis = {target, a, j};
                return true;
            }
        }
        return false;
    }

    static bool invert(const std::array<double, 9>& m, std::array<double, 9>& inv) {
        double det = m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
        if (std::fabs(det) < 1e-300) return false;
        inv[0] = (m[4] * m[8] - m[5] * m[7]) / det;
        inv[1] = (m[2] * m[7] - m[1] * m[8]) / det;
        inv[2] = (m[1] * m[5] - m[2] * m[4]) / det;
        inv[3] = (m[5] * m[6] - m[3] * m[8]) / det;
        inv[4] = (m[0] * m[8] - m[2] * m[6]) / det;
        inv[5] = (m[2] * m[3] - m[0] * m[5]) / det;
        inv[6] = (m[3] * m[7] - m[4] * m[6]) / det;
        inv[7] = (m[1] * m[6] - m[0] * m[7]) / det;
        inv[8] = (m[0] * m[4] - m[1] * m[3]) / det;
        return true;
    }

    const Mesh& mesh_;
    const std::vector<double>& u_;
};

using Polygon = std::vector<std::array<double, 2>>;

// Keeps the part of `poly` with a·p ≥ c.
Polygon clip(const Polygon& poly, double a0, double a1, double c) {
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % n];
        double fp = a0 * p[0] + a1 * p[1] - c;
        double fq = a0 * q[0] + a1 * q[1] - c;
        if (fp >= 0.0) out.push_back(p);
        if ((fp >= 0.0) != (fq >= 0.0)) {
            double t = fp / (fp - fq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

double area(const Polygon& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * std::fabs(s);
}

} // namespace

ConcaveEnvelope concave_envelope(const MeshFunction& u) {
    const Mesh& mesh = u.mesh();
    const int n = mesh.dim();
    if (n > 2) throw std::invalid_argument("concave_envelope: only dimensions 1 and 2 are supported");
    std::vector<double> env;
    if (n == 1) {
        env = envelope_1d(mesh, u.values());
    } else {
        env.resize(mesh.size());
        EnvelopeLP lp(mesh, u.values());
        parallel_for(mesh.size(), [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) env[i] = lp.solve(i);
        }, 16);
    }
    ConcaveEnvelope out{MeshFunction(u.mesh_ptr(), std::move(env)), {}};
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (out.envelope[i] - u[i] <= kContactTol * (1.0 + std::fabs(u[i]))) out.contact.push_back(i);
    return out;
}

double monge_ampere_mass(const MeshFunction& u, const ConcaveEnvelope& env) {
    const Mesh& mesh = u.mesh();
    const int n = mesh.dim();
    if (n > 2) throw std::invalid_argument("monge_ampere_mass: only dimensions 1 and 2 are supported");
    double span = 0.0;
    for (double v : u.values()) span = std::max(span, std::fabs(v));
    const double cap = 4.0 * span / mesh.h() + 1.0; // no finite slope exceeds this
    double mass = 0.0;
    for (std::size_t i : env.contact) {
        if (!(u[i] > 0.0)) continue;
        auto xi = mesh.point(i);
        if (n == 1) {
            double lo = -cap, hi = cap;
            for (std::size_t j = 0; j < mesh.size(); ++j) {
                if (j == i) continue;
                double dx = mesh.point(j)[0] - xi[0];
                double s = (u[j] - u[i]) / dx;
                if (dx > 0.0) lo = std::max(lo, s);
                else hi = std::min(hi, s);
            }
            mass += std::max(0.0, hi - lo);
        } else {
            Polygon poly{{-cap, -cap}, {cap, -cap}, {cap, cap}, {-cap, cap}};
            // Superdifferential: u_j ≤ u_i + p·(x_j - x_i)  ⇔  p·(x_j - x_i) ≥ u_j - u_i.
            for (std::size_t j = 0; j < mesh.size() && !poly.empty(); ++j) {
                if (j == i) continue;
                auto xj = mesh.point(j);
                poly = clip(poly, xj[0] - xi[0], xj[1] - xi[1], u[j] - u[i]);
            }
            if (poly.size() >= 3) mass += area(poly);
        }
    }
    return mass;
}

} // namespace nonlin
