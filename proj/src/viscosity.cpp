#include "nonlin/viscosity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "nonlin/parallel.hpp"
#include "nonlin/rng.hpp"
#include "nonlin/simd/kernels.hpp"

namespace nonlin {

double Paraboloid::eval(std::span<const double> x) const {
    const std::size_t n = x0.size();
    std::vector<double> d(n);
    for (std::size_t k = 0; k < n; ++k) d[k] = x[k] - x0[k];
    return c + dot(b, d) + 0.5 * M.quad(d);
}

namespace {

// Lattice offsets o with |o| h < δ (open ball), origin first.
std::vector<std::vector<int>> ball_offsets(int n, double h, double delta) {
    const int K = static_cast<int>(std::ceil(delta / h));
    const double r2 = (delta / h) * (delta / h) * (1.0 - 1e-12);
    std::vector<std::vector<int>> out{std::vector<int>(n, 0)};
    std::vector<int> o(n, -K);
    while (true) {
        long s = 0;
        bool zero = true;
        for (int c : o) {
            s += long(c) * c;
            zero = zero && c == 0;
        }
        if (!zero && double(s) < r2) out.push_back(o);
        int i = n - 1;
        while (i >= 0 && o[i] == K) o[i--] = -K;
        if (i < 0) break;
        ++o[i];
    }
    return out;
}

bool gather_ball(const Mesh& mesh, std::size_t centre, const std::vector<std::vector<int>>& offsets,
                 std::vector<std::size_t>& out) {
    out.clear();
    for (const auto& o : offsets) {
        auto q = mesh.shifted(centre, o);
        if (!q) return false;
        out.push_back(*q);
    }
    return true;
}

TouchResult touch_impl(const MeshFunction& v, std::span<const double> b, const SymMat& M, std::size_t x,
                       double delta, TouchSide side, double margin,
                       const std::vector<std::vector<int>>& offsets) {
    const Mesh& mesh = v.mesh();
    const int n = mesh.dim();
    if (margin < 0.0) margin = delta;
    auto base = mesh.point(x);
    std::vector<double> d(n);
    auto Q = [&](std::size_t i) {
        auto y = mesh.point(i);
        for (int k = 0; k < n; ++k) d[k] = y[k] - base[k];
        return dot(b, d) + 0.5 * M.quad(d);
    };
    // below: minimise v - Q; above: maximise v - Q (minimise Q - v).
    const double s = side == TouchSide::below ? 1.0 : -1.0;

    TouchResult res;
    std::vector<std::size_t> ball;
    std::size_t centre = x;
    bool fixed = false;
    for (int round = 0; round < 5; ++round) {
        if (!gather_ball(mesh, centre, offsets, ball)) {
            res.rejection = "ball leaves the mesh";
            return res;
        }
        std::size_t arg = centre;
        double best = s * (v[centre] - Q(centre));
        for (std::size_t i : ball) {
            double val = s * (v[i] - Q(i));
            if (val < best) {
                best = val;
                arg = i;
            }
        }
        if (arg == centre) {
            fixed = true;
            break;
        }
        centre = arg;
    }
    if (!fixed) {
        res.rejection = "no fixed point after 5 re-centring rounds";
        return res;
    }
    if (!(mesh.distance(centre) > margin)) {
        res.rejection = "touch point outside the admissible set";
        return res;
    }

    TouchCertificate cert;
    cert.touch = centre;
    cert.side = side;
    cert.delta = delta;
    auto xp = mesh.point(centre);
    cert.paraboloid.x0.assign(xp.begin(), xp.end());
    cert.paraboloid.c = v[centre];
    for (int k = 0; k < n; ++k) d[k] = xp[k] - base[k];
    auto Md = M.apply(d);
    cert.paraboloid.b.resize(n);
    for (int k = 0; k < n; ++k) cert.paraboloid.b[k] = b[k] + Md[k];
    cert.paraboloid.M = M;
    cert.residual_min = std::numeric_limits<double>::infinity();
    cert.residual_max = -std::numeric_limits<double>::infinity();
    for (std::size_t i : ball) {
        double r = cert.paraboloid.eval(mesh.point(i)) - v[i];
        cert.residual_min = std::min(cert.residual_min, r);
        cert.residual_max = std::max(cert.residual_max, r);
    }
    res.certificate = std::move(cert);
    return res;
}

} // namespace

TouchResult touch(const MeshFunction& v, std::span<const double> b, const SymMat& M, std::size_t x, double delta,
                  TouchSide side, double margin) {
    if (!(delta > 0.0)) throw std::invalid_argument("touch: delta must be positive");
    const Mesh& mesh = v.mesh();
    if (static_cast<int>(b.size()) != mesh.dim() || M.dim() != mesh.dim())
        throw std::invalid_argument("touch: shape dimension mismatch");
    return touch_impl(v, b, M, x, delta, side, margin, ball_offsets(mesh.dim(), mesh.h(), delta));
}

bool verify_certificate(const MeshFunction& v, const TouchCertificate& cert, double tol) {
    const Mesh& mesh = v.mesh();
    std::vector<std::size_t> ball;
    if (!gather_ball(mesh, cert.touch, ball_offsets(mesh.dim(), mesh.h(), cert.delta), ball)) return false;
    const double scale = 1.0 + std::fabs(v[cert.touch]);
    if (std::fabs(cert.paraboloid.eval(mesh.point(cert.touch)) - v[cert.touch]) > tol * scale) return false;
    for (std::size_t i : ball) {
        double r = cert.paraboloid.eval(mesh.point(i)) - v[i];
        if (cert.side == TouchSide::below && r > tol * scale) return false;
        if (cert.side == TouchSide::above && r < -tol * scale) return false;
    }
    return true;
}

std::string DeltaReport::to_json() const {
    nlohmann::json j;
    j["accepted"] = accepted;
    j["rejected"] = rejected;
    j["violations"] = violations;
    j["worst_margin"] = worst_margin;
    j["seed"] = seed;
    j["inconclusive"] = inconclusive();
    j["caps"] = {{"M_max", M_max}, {"grad_cap", grad_cap}, {"delta", delta}, {"slack", slack}, {"samples", samples}};
    return j.dump();
}

namespace {

double value_at(const MeshFunction& v, std::size_t i, std::span<const int> o, bool& ok) {
    auto q = v.mesh().shifted(i, o);
    if (!q) {
        ok = false;
        return 0.0;
    }
    return v[*q];
}

Point discrete_gradient(const MeshFunction& v, std::size_t i) {
    const int n = v.mesh().dim();
    const double h = v.mesh().h();
    Point g(n, 0.0);
    std::vector<int> o(n, 0);
    for (int k = 0; k < n; ++k) {
        bool ok = true;
        o[k] = 1;
        double p = value_at(v, i, o, ok);
        o[k] = -1;
        double m = value_at(v, i, o, ok);
        o[k] = 0;
        if (ok) g[k] = (p - m) / (2.0 * h);
    }
    return g;
}

SymMat discrete_hessian(const MeshFunction& v, std::size_t i) {
    const int n = v.mesh().dim();
    const double h = v.mesh().h();
    SymMat H(n);
    std::vector<int> o(n, 0);
    for (int k = 0; k < n; ++k) {
        bool ok = true;
        o[k] = 1;
        double p = value_at(v, i, o, ok);
        o[k] = -1;
        double m = value_at(v, i, o, ok);
        o[k] = 0;
        if (ok) H.set(k, k, (p - 2.0 * v[i] + m) / (h * h));
        for (int l = k + 1; l < n; ++l) {
            bool ok2 = true;
            double acc = 0.0;
            for (int sk : {1, -1})
                for (int sl : {1, -1}) {
                    o[k] = sk;
                    o[l] = sl;
                    acc += sk * sl * value_at(v, i, o, ok2);
                }
            o[k] = o[l] = 0;
            if (ok2) H.set(k, l, acc / (4.0 * h * h));
        }
    }
    return H;
}

double discrete_lipschitz(const MeshFunction& v) {
    const Mesh& mesh = v.mesh();
    const int n = mesh.dim();
    std::vector<int> o(n, 0);
    double lip = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        for (int k = 0; k < n; ++k) {
            o[k] = 1;
            if (auto q = mesh.shifted(i, o)) lip = std::max(lip, std::fabs(v[*q] - v[i]) / mesh.h());
            o[k] = 0;
        }
    }
    return lip;
}

SymMat random_symmetric_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    SymMat S(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) S.set(i, j, g(rng));
    double s = spectral_norm(S);
    if (s > 0.0) S *= 1.0 / s;
    return S;
}

} // namespace

DeltaReport delta_solution_check(const MeshFunction& v, const OperatorWithRhs& G, double delta, std::size_t samples,
                                 double M_max, double slack, std::uint64_t seed, const DeltaCheckOptions& opts) {
    if (samples < 1) throw std::invalid_argument("delta_solution_check: samples must be >= 1");
    if (!(M_max > 0.0)) throw std::invalid_argument("delta_solution_check: M_max must be positive");
    if (!opts.check_sub && !opts.check_super) throw std::invalid_argument("delta_solution_check: no side selected");
    const Mesh& mesh = v.mesh();
    const int n = mesh.dim();
    const double margin = opts.margin < 0.0 ? delta : opts.margin;

    DeltaReport rep;
    rep.seed = seed;
    rep.M_max = M_max;
    rep.delta = delta;
    rep.slack = slack;
    rep.samples = samples;
    rep.grad_cap = opts.grad_cap < 0.0 ? 10.0 * discrete_lipschitz(v) + 1.0 : opts.grad_cap;
    rep.worst_margin = std::numeric_limits<double>::infinity();

    const auto bases = eroded_points(mesh, margin);
    if (bases.empty()) {
        rep.rejected = samples;
        return rep;
    }
    const auto offsets = ball_offsets(n, mesh.h(), delta);

    // 0 = rejected, 1 = accepted; margin per sample.
    std::vector<char> accepted(samples, 0);
    std::vector<double> margins(samples, 0.0);
    parallel_for(samples, [&](std::size_t begin, std::size_t end) {
        for (std::size_t s = begin; s < end; ++s) {
            auto rng = stream(seed, s);
            std::uniform_real_distribution<double> unit(0.0, 1.0);
            const std::size_t x = bases[std::uniform_int_distribution<std::size_t>(0, bases.size() - 1)(rng)];
            TouchSide side;
            if (opts.check_sub && opts.check_super) side = s % 2 == 0 ? TouchSide::below : TouchSide::above;
            else side = opts.check_super ? TouchSide::below : TouchSide::above;

            Point b = discrete_gradient(v, x);
            std::normal_distribution<double> g(0.0, 1.0);
            const double noise = 0.1 * rep.grad_cap * unit(rng);
            Point dir(n);
            for (double& c : dir) c = g(rng);
            double dn = norm(dir);
            for (int k = 0; k < n; ++k) b[k] += dn > 0.0 ? noise * unit(rng) * dir[k] / dn : 0.0;
            double bn = norm(b);
            if (bn > rep.grad_cap)
                for (double& c : b) c *= rep.grad_cap / bn;

            SymMat M;
            if (unit(rng) < 0.5) {
                M = random_symmetric_unit(n, rng);
                M *= M_max * unit(rng);
            } else {
                M = discrete_hessian(v, x);
                SymMat S = random_symmetric_unit(n, rng);
                S *= 0.25 * M_max * unit(rng);
                M += S;
            }
            double mn = spectral_norm(M);
            if (mn > M_max) M *= M_max / mn;

            auto t = touch_impl(v, b, M, x, delta, side, margin, offsets);
            if (!t.certificate) continue;
            accepted[s] = 1;
            double gv = G(M, mesh.point(t.certificate->touch));
            margins[s] = side == TouchSide::below ? slack - gv : gv + slack;
        }
    }, 64);

    for (std::size_t s = 0; s < samples; ++s) {
        if (!accepted[s]) {
            ++rep.rejected;
            continue;
        }
        ++rep.accepted;
        rep.worst_margin = std::min(rep.worst_margin, margins[s]);
        if (margins[s] < 0.0) ++rep.violations;
    }
    if (rep.accepted == 0) rep.worst_margin = 0.0;
    return rep;
}

double SlidingResult::eval_l(std::span<const double> x) const {
    double s = l0;
    for (std::size_t k = 0; k < slope.size(); ++k) s += slope[k] * (x[k] - point[k]);
    return s;
}

SlidingResult sliding_paraboloid(const MeshFunction& w, double m, std::optional<Point> y) {
    const Mesh& mesh = w.mesh();
    const Domain& dom = mesh.domain();
    double sup = -std::numeric_limits<double>::infinity();
    for (double val : w.values()) sup = std::max(sup, val);
    if (!(m > 0.0)) throw std::invalid_argument("sliding_paraboloid: m must be positive");
    if (m > sup) throw std::invalid_argument("sliding_paraboloid: m exceeds sup w");
    for (std::size_t i = 0; i < mesh.size(); ++i)
        if (mesh.distance(i) <= 1e-9 * mesh.h() && w[i] > 0.0)
            throw std::invalid_argument("sliding_paraboloid: w > 0 at a boundary point");

    SlidingResult r;
    r.y = y ? *y : dom.barycenter();
    if (!dom.contains(r.y, 1e-12)) throw std::invalid_argument("sliding_paraboloid: y outside the domain");
    r.R = dom.diameter();
    r.m = m;
    const double k = m / (2.0 * r.R * r.R);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        double phi = -k * distance_sq(mesh.point(i), r.y) - w[i];
        if (phi < best) {
            best = phi;
            r.x0 = i;
        }
    }
    auto x0 = mesh.point(r.x0);
    r.point.assign(x0.begin(), x0.end());
    r.l0 = w[r.x0];
    r.slope.resize(x0.size());
    for (std::size_t a = 0; a < x0.size(); ++a) r.slope[a] = -(m / (r.R * r.R)) * (x0[a] - r.y[a]);
    return r;
}

SlidingCheck check_sliding(const MeshFunction& w, const SlidingResult& r, double holder_seminorm, double eta,
                           double tol) {
    const Mesh& mesh = w.mesh();
    SlidingCheck c;
    const double k = r.m / (2.0 * r.R * r.R);
    c.upper_bound_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        auto x = mesh.point(i);
        double bound = r.eval_l(x) - k * distance_sq(x, r.point);
        c.upper_bound_excess = std::max(c.upper_bound_excess, w[i] - bound);
    }
    c.upper_ok = c.upper_bound_excess <= tol;
    c.value_ratio = w[r.x0] / r.m;
    c.value_ok = w[r.x0] >= r.m / 2.0 - tol;
    c.distance = distance_to_boundary(mesh.domain(), r.point);
    c.distance_bound = holder_seminorm > 0.0 ? std::pow(r.m / (2.0 * holder_seminorm), 1.0 / eta) : 0.0;
    c.distance_ok = c.distance >= c.distance_bound - tol;
    return c;
}

DoublingResult doubling_gap(const MeshFunction& v, const MeshFunction& w, double a, std::optional<double> lip_v,
                            std::optional<double> lip_w) {
    if (!(a > 0.0)) throw std::invalid_argument("doubling_gap: a must be positive");
    if (v.mesh_ptr() != w.mesh_ptr() && v.size() != w.size())
        throw std::invalid_argument("doubling_gap: v and w must live on the same mesh");
    const Mesh& mesh = v.mesh();
    const std::size_t M = mesh.size();
    if (M > 10000)
        throw std::invalid_argument("doubling_gap: mesh has more than 1e4 points; exhaustive pair scan refused "
                                    "(use a coarser mesh or a subsampled scan)");
    const int n = mesh.dim();
    std::vector<std::vector<double>> axes(n, std::vector<double>(M));
    std::vector<const double*> ptr(n);
    for (int k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < M; ++i) axes[k][i] = mesh.point(i)[k];
        ptr[k] = axes[k].data();
    }
    std::vector<double> neg_w(M), vv(v.values());
    for (std::size_t i = 0; i < M; ++i) neg_w[i] = -w[i];
    const double two_theta = 2.0 / a;
    simd::Candidates over_y{neg_w.data(), ptr.data(), M, n};
    simd::Candidates over_x{vv.data(), ptr.data(), M, n};

    std::vector<simd::ArgMax> row(M);
    parallel_for(M, [&](std::size_t b, std::size_t e) {
        std::vector<double> x(n);
        for (std::size_t i = b; i < e; ++i) {
            for (int k = 0; k < n; ++k) x[k] = axes[k][i];
            row[i] = simd::penalized_argmax(over_y, x.data(), two_theta);
        }
    }, 16);

    DoublingResult r;
    r.value = -std::numeric_limits<double>::infinity();
    r.boundary_sup = -std::numeric_limits<double>::infinity();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < M; ++i) {
        double val = v[i] + row[i].value;
        if (val > r.value) {
            r.value = val;
            r.x_a = i;
            r.y_a = row[i].index;
        }
        if (mesh.distance(i) <= 1e-9 * mesh.h()) {
            r.boundary_sup = std::max(r.boundary_sup, val);
            for (int k = 0; k < n; ++k) x[k] = axes[k][i];
            auto col = simd::penalized_argmax(over_x, x.data(), two_theta);
            r.boundary_sup = std::max(r.boundary_sup, col.value - w[i]);
        }
    }
    r.gap = distance(mesh.point(r.x_a), mesh.point(r.y_a));
    if (lip_v || lip_w) {
        double lm = std::min(lip_v.value_or(std::numeric_limits<double>::infinity()),
                             lip_w.value_or(std::numeric_limits<double>::infinity()));
        r.gap_bound = 2.0 * lm / a;
        r.gap_ok = r.gap <= *r.gap_bound * (1.0 + 1e-12);
    }
    if (lip_v && lip_w) {
        r.boundary_bound = 2.0 * (*lip_v * *lip_v + *lip_w * *lip_w) / a;
        r.boundary_ok = r.boundary_sup <= *r.boundary_bound + 1e-12;
    }
    return r;
}

} // namespace nonlin
