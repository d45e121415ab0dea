#include "nonlin/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "nonlin/parallel.hpp"
#include "nonlin/rng.hpp"

namespace nonlin {

Stencil::Stencil(int dim, int width) : dim_(dim), width_(width) {
    if (dim < 1) throw std::invalid_argument("Stencil: dim must be >= 1");
    if (width < 1) throw std::invalid_argument("Stencil: width N must be >= 1");
    std::vector<std::vector<int>> found;
    std::vector<int> v(dim, -width);
    while (true) {
        int sq = 0, g = 0, first = 0;
        for (int c : v) {
            sq += c * c;
            g = std::gcd(g, std::abs(c));
            if (first == 0) first = c;
        }
        if (sq > 0 && sq <= width * width && g == 1 && first > 0) found.push_back(v);
        int i = dim - 1;
        while (i >= 0 && v[i] == width) v[i--] = -width;
        if (i < 0) break;
        ++v[i];
    }
    std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
        int na = 0, nb = 0;
        for (int c : a) na += c * c;
        for (int c : b) nb += c * c;
        if (na != nb) return na < nb;
        return a > b;
    });
    for (const auto& d : found) {
        dirs_.insert(dirs_.end(), d.begin(), d.end());
        double l2 = 0.0;
        for (int c : d) l2 += double(c) * c;
        len_.push_back(std::sqrt(l2));
        std::vector<double> unit(dim);
        for (int k = 0; k < dim; ++k) unit[k] = d[k] / len_.back();
        proj_.push_back(SymMat::outer(unit));
    }
}

double delta_y2(const MeshFunction& u, std::size_t i, std::span<const int> v) {
    const Mesh& m = u.mesh();
    std::vector<int> neg(v.begin(), v.end());
    for (int& c : neg) c = -c;
    auto p = m.shifted(i, v);
    auto q = m.shifted(i, neg);
    if (!p || !q) throw Error("delta_y2: stencil leaves the mesh at point " + std::to_string(i));
    double l2 = 0.0;
    for (int c : v) l2 += double(c) * c;
    double y2 = l2 * m.h() * m.h();
    return (u[*q] - 2.0 * u[i] + u[*p]) / y2;
}

namespace {

using Key = std::vector<double>;

Key leaf_key(const DiscreteLeaf& leaf) {
    Key k{leaf.c, double(leaf.terms.size())};
    for (const auto& [d, w] : leaf.terms) {
        k.push_back(double(d));
        k.push_back(w);
    }
    return k;
}

// Exact duplicates are dropped: they cannot change a min or a max.
DiscreteAlpha dedupe_alpha(const DiscreteAlpha& a, Key& key) {
    DiscreteAlpha out;
    std::set<Key> seen;
    for (const auto& leaf : a) {
        Key k = leaf_key(leaf);
        if (seen.insert(k).second) {
            out.push_back(leaf);
            key.push_back(double(k.size()));
            key.insert(key.end(), k.begin(), k.end());
        }
    }
    return out;
}

DiscreteGroup dedupe_group(const DiscreteGroup& g, Key& key) {
    DiscreteGroup out;
    std::set<Key> seen;
    for (const auto& a : g) {
        Key k;
        auto da = dedupe_alpha(a, k);
        if (seen.insert(k).second) {
            out.push_back(std::move(da));
            key.push_back(double(k.size()));
            key.insert(key.end(), k.begin(), k.end());
        }
    }
    return out;
}

DiscreteGame dedupe_game(const DiscreteGame& game) {
    DiscreteGame out;
    std::set<Key> seen;
    for (const auto& g : game) {
        Key k;
        auto dg = dedupe_group(g, k);
        if (seen.insert(k).second) out.push_back(std::move(dg));
    }
    return out;
}

} // namespace

DiscreteOperator::DiscreteOperator(MeshPtr mesh, Stencil stencil, const std::vector<DiscreteGame>& games,
                                   std::vector<double> rhs)
    : mesh_(std::move(mesh)), stencil_(std::move(stencil)), rhs_(std::move(rhs)) {
    const std::size_t P = mesh_->interior().size();
    if (games.size() != P || rhs_.size() != P)
        throw std::invalid_argument("DiscreteOperator: one game and one rhs value per interior point required");
    if (stencil_.dim() != mesh_->dim()) throw std::invalid_argument("DiscreteOperator: stencil dimension mismatch");

    const std::size_t D = stencil_.size();
    plus_.resize(P * D);
    minus_.resize(P * D);
    std::vector<int> neg(stencil_.dim());
    for (std::size_t p = 0; p < P; ++p) {
        std::size_t i = mesh_->interior()[p];
        for (std::size_t d = 0; d < D; ++d) {
            auto v = stencil_.direction(d);
            for (int k = 0; k < stencil_.dim(); ++k) neg[k] = -v[k];
            auto a = mesh_->shifted(i, v);
            auto b = mesh_->shifted(i, neg);
            if (!a || !b) throw Error("DiscreteOperator: stencil leaves the mesh at interior point " + std::to_string(i));
            plus_[p * D + d] = *a;
            minus_[p * D + d] = *b;
        }
    }

    const double h2 = mesh_->h() * mesh_->h();
    point_group_.push_back(0);
    group_alpha_.push_back(0);
    alpha_leaf_.push_back(0);
    leaf_entry_.push_back(0);
    for (std::size_t p = 0; p < P; ++p) {
        DiscreteGame game = dedupe_game(games[p]);
        if (game.empty()) throw std::invalid_argument("DiscreteOperator: empty game at interior point");
        for (const auto& g : game) {
            if (g.empty()) throw std::invalid_argument("DiscreteOperator: empty control group");
            for (const auto& a : g) {
                if (a.empty()) throw std::invalid_argument("DiscreteOperator: empty control set");
                for (const auto& leaf : a) {
                    double diag = 0.0, k = 0.0;
                    for (const auto& [d, w] : leaf.terms) {
                        if (d >= D) throw std::invalid_argument("DiscreteOperator: direction index out of range");
                        if (w == 0.0) continue;
                        double l = stencil_.length(d);
                        double coef = w / (l * l * h2);
                        entry_dir_.push_back(d);
                        entry_coef_.push_back(coef);
                        diag += coef;
                        k += std::fabs(w) * l / 3.0;
                    }
                    leaf_c_.push_back(leaf.c);
                    leaf_entry_.push_back(static_cast<std::uint32_t>(entry_dir_.size()));
                    max_diag_ = std::max(max_diag_, diag);
                    K_ = std::max(K_, k);
                }
                alpha_leaf_.push_back(static_cast<std::uint32_t>(leaf_c_.size()));
            }
            group_alpha_.push_back(static_cast<std::uint32_t>(alpha_leaf_.size() - 1));
        }
        point_group_.push_back(static_cast<std::uint32_t>(group_alpha_.size() - 1));
    }
}

double DiscreteOperator::leaf_value(std::size_t p, std::size_t l, std::span<const double> u) const {
    const std::size_t D = stencil_.size();
    const double uc = u[mesh_->interior()[p]];
    double s = 0.0;
    for (std::uint32_t e = leaf_entry_[l]; e < leaf_entry_[l + 1]; ++e) {
        std::size_t d = entry_dir_[e];
        s += entry_coef_[e] * (u[plus_[p * D + d]] + u[minus_[p * D + d]] - 2.0 * uc);
    }
    return s + leaf_c_[l];
}

double DiscreteOperator::eval_point(std::size_t p, std::span<const double> u) const {
    double gmin = std::numeric_limits<double>::infinity();
    for (std::uint32_t g = point_group_[p]; g < point_group_[p + 1]; ++g) {
        double amax = -std::numeric_limits<double>::infinity();
        for (std::uint32_t a = group_alpha_[g]; a < group_alpha_[g + 1]; ++a) {
            double bmin = std::numeric_limits<double>::infinity();
            for (std::uint32_t l = alpha_leaf_[a]; l < alpha_leaf_[a + 1]; ++l) bmin = std::min(bmin, leaf_value(p, l, u));
            amax = std::max(amax, bmin);
        }
        gmin = std::min(gmin, amax);
    }
    return gmin - rhs_[p];
}

std::vector<double> DiscreteOperator::eval(std::span<const double> u) const {
    if (u.size() != mesh_->size()) throw std::invalid_argument("DiscreteOperator::eval: size mismatch");
    std::vector<double> out(interior_count());
    parallel_for(out.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t p = b; p < e; ++p) out[p] = eval_point(p, u);
    });
    return out;
}

double DiscreteOperator::residual(std::span<const double> u) const {
    double r = 0.0;
    for (double v : eval(u)) r = std::max(r, std::fabs(v));
    return r;
}

namespace {

int suggest_width(const SymMat& a, int from) {
    for (int w = from + 1; w <= from + 6; ++w)
        if (decompose_matrix(a, Stencil(a.dim(), w)).exact()) return w;
    return -1;
}

} // namespace

DiscreteOperator assemble(const Nonlinearity& F, const ScalarField& f, const MeshPtr& mesh) {
    const int n = mesh->dim();
    Stencil stencil(n, mesh->width());
    const auto& interior = mesh->interior();
    const std::size_t P = interior.size();
    std::vector<DiscreteGame> games(P);
    std::vector<double> rhs(P);

    parallel_for(P, [&](std::size_t b, std::size_t e) {
        std::map<std::vector<double>, DirectionalWeights> cache;
        for (std::size_t p = b; p < e; ++p) {
            auto x = mesh->point(interior[p]);
            rhs[p] = f.value(x);
            GameForm form = F.game_form(x, n);
            DiscreteGame& game = games[p];
            for (const auto& g : form.groups) {
                DiscreteGroup dg;
                for (const auto& a : g) {
                    DiscreteAlpha da;
                    for (const auto& leaf : a) {
                        std::vector<double> key(leaf.a.packed().begin(), leaf.a.packed().end());
                        auto it = cache.find(key);
                        if (it == cache.end()) it = cache.emplace(key, decompose_matrix(leaf.a, stencil)).first;
                        const auto& w = it->second;
                        if (!w.exact()) {
                            std::ostringstream os;
                            os << "coefficient matrix at mesh point (";
                            for (std::size_t k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
                            os << ") is not decomposable over the N=" << mesh->width()
                               << " stencil (residual " << w.residual << "); widen N";
                            int s = suggest_width(leaf.a, mesh->width());
                            if (s > 0) os << " to at least " << s;
                            throw DecompositionError(os.str());
                        }
                        DiscreteLeaf dl;
                        dl.c = leaf.c;
                        for (std::size_t d = 0; d < w.weights.size(); ++d)
                            if (w.weights[d] > 0.0) dl.terms.emplace_back(static_cast<std::uint32_t>(d), w.weights[d]);
                        da.push_back(std::move(dl));
                    }
                    dg.push_back(std::move(da));
                }
                game.push_back(std::move(dg));
            }
        }
    }, 16);

    DiscreteOperator op(mesh, std::move(stencil), games, std::move(rhs));
    op.F_ = F;
    op.f_ = f;
    return op;
}

MonotonicityReport monotonicity_check(const DiscreteOperator& op, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("monotonicity_check: trials must be >= 1");
    MonotonicityReport rep;
    rep.trials = trials;
    const std::size_t D = op.stencil().size();
    const std::size_t P = op.interior_count();
    std::vector<double> u(op.mesh().size(), 0.0);
    std::vector<std::size_t> nbrs;
    std::vector<double> eta;
    for (int t = 0; t < trials; ++t) {
        auto rng = stream(seed, static_cast<std::uint64_t>(t));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::size_t p = std::uniform_int_distribution<std::size_t>(0, P - 1)(rng);
        std::size_t c = op.interior_index(p);
        nbrs.clear();
        for (std::size_t d = 0; d < D; ++d) {
            nbrs.push_back(op.plus(p, d));
            nbrs.push_back(op.minus(p, d));
        }
        for (std::size_t i : nbrs) u[i] = 2.0 * unit(rng) - 1.0;
        u[c] = 2.0 * unit(rng) - 1.0;

        const bool zero_eta = t % 16 == 0;
        eta.assign(nbrs.size(), 0.0);
        double eta_max = 0.0;
        for (double& e : eta) {
            if (!zero_eta && unit(rng) < 0.7) e = unit(rng);
            eta_max = std::max(eta_max, e);
        }
        const double tau = eta_max + unit(rng);

        const double f0 = op.eval_point(p, u);
        for (std::size_t k = 0; k < nbrs.size(); ++k) u[nbrs[k]] += eta[k];
        const double f1 = op.eval_point(p, u);
        u[c] += tau;
        const double f2 = op.eval_point(p, u);
        u[c] -= tau;
        for (std::size_t k = 0; k < nbrs.size(); ++k) u[nbrs[k]] -= eta[k];

        const double slack = 1e-10 * (1.0 + std::fabs(f0));
        double bad = std::max(f0 - f1, f2 - f0);
        if (zero_eta) bad = std::max(bad, std::fabs(f1 - f0));
        if (bad > slack) {
            ++rep.violations;
            rep.worst = std::max(rep.worst, bad);
        }
    }
    return rep;
}

ConsistencyReport consistency_check(const DiscreteOperator& op, const ScalarField& phi, double K) {
    if (!op.nonlinearity()) throw std::invalid_argument("consistency_check: operator has no source nonlinearity");
    if (!phi.has_exact_derivatives())
        throw std::invalid_argument("consistency_check: test function needs an exact Hessian");
    const Nonlinearity& F = *op.nonlinearity();
    const Mesh& mesh = op.mesh();
    ConsistencyReport rep;
    rep.K = K > 0.0 ? K : op.consistency_constant();
    const double third = phi.third_derivative_bound(mesh.domain());
    rep.bound = rep.K * (1.0 + third) * mesh.h();
    MeshFunction u = sample(op.mesh_ptr(), phi);
    double scale = 0.0;
    for (std::size_t p = 0; p < op.interior_count(); ++p) {
        std::size_t i = op.interior_index(p);
        auto x = mesh.point(i);
        double target = F.eval(phi.hessian(x), x) - op.source().value(x);
        double d = std::fabs(op.eval_point(p, u.values()) - target);
        scale = std::max(scale, std::fabs(target));
        if (d > rep.max_discrepancy || p == 0) {
            rep.max_discrepancy = std::max(rep.max_discrepancy, d);
            rep.worst_point = i;
        }
    }
    rep.passed = rep.max_discrepancy <= rep.bound + 1e-10 * (1.0 + scale);
    return rep;
}

} // namespace nonlin
