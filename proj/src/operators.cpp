#include "nonlin/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "nonlin/rng.hpp"

namespace nonlin {

double GameForm::eval(const SymMat& x) const {
    double gmin = std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
        double amax = -std::numeric_limits<double>::infinity();
        for (const auto& a : g) {
            double bmin = std::numeric_limits<double>::infinity();
            for (const auto& leaf : a) bmin = std::min(bmin, frobenius_dot(leaf.a, x) + leaf.c);
            amax = std::max(amax, bmin);
        }
        gmin = std::min(gmin, amax);
    }
    return gmin;
}

std::size_t GameForm::leaf_count() const {
    std::size_t n = 0;
    for (const auto& g : groups)
        for (const auto& a : g) n += a.size();
    return n;
}

namespace {

using detail::NonlinearityImpl;

void check_constants(double lambda, double Lambda) {
    if (!(lambda > 0.0) || !(lambda <= Lambda))
        throw std::invalid_argument("ellipticity constants must satisfy 0 < lambda <= Lambda");
}

struct LinearImpl final : NonlinearityImpl {
    LinearImpl(CoeffField a, double lambda, double Lambda) : a(std::move(a)), lam(lambda), Lam(Lambda) {}
    Nonlinearity::Kind kind() const override { return Nonlinearity::Kind::linear; }
    double lambda() const override { return lam; }
    double Lambda() const override { return Lam; }
    double kappa(const Domain& d) const override { return a.nuclear_lipschitz(d); }
    bool normalized() const override { return true; }
    bool x_independent() const override { return a.is_constant(); }
    std::string describe() const override { return "linear"; }
    double eval(const SymMat& X, std::span<const double> x) const override {
        return frobenius_dot(a.value(x), X);
    }
    GameForm game_form(std::span<const double> x, int) const override {
        return GameForm{{GameGroup{GameAlpha{GameLeaf{a.value(x), 0.0}}}}};
    }
    CoeffField a;
    double lam, Lam;
};

struct PucciImpl final : NonlinearityImpl {
    PucciImpl(double lambda, double Lambda, int sign) : lam(lambda), Lam(Lambda), sign(sign) {}
    Nonlinearity::Kind kind() const override { return Nonlinearity::Kind::pucci; }
    double lambda() const override { return lam; }
    double Lambda() const override { return Lam; }
    double kappa(const Domain&) const override { return 0.0; }
    bool normalized() const override { return true; }
    bool x_independent() const override { return true; }
    std::string describe() const override { return sign > 0 ? "pucci_max" : "pucci_min"; }
    double eval(const SymMat& X, std::span<const double>) const override {
        double pos = 0.0, neg = 0.0;
        for (double e : X.eigenvalues()) (e > 0.0 ? pos : neg) += e;
        return sign > 0 ? Lam * pos + lam * neg : lam * pos + Lam * neg;
    }
    // Axis-aligned family diag(μ), μ ∈ {λ, Λ}ⁿ. Exact for Hessians that are
    // diagonal in the lattice frame.
    GameForm game_form(std::span<const double>, int dim) const override {
        std::vector<SymMat> family;
        for (unsigned mask = 0; mask < (1u << dim); ++mask) {
            std::vector<double> mu(dim);
            for (int k = 0; k < dim; ++k) mu[k] = (mask >> k) & 1u ? Lam : lam;
            family.push_back(SymMat::diagonal(mu));
        }
        GameForm form;
        if (sign > 0) {
            GameGroup g;
            for (auto& m : family) g.push_back(GameAlpha{GameLeaf{std::move(m), 0.0}});
            form.groups.push_back(std::move(g));
        } else {
            for (auto& m : family) form.groups.push_back(GameGroup{GameAlpha{GameLeaf{std::move(m), 0.0}}});
        }
        return form;
    }
    double lam, Lam;
    int sign;
};

struct IsaacsImpl final : NonlinearityImpl {
    IsaacsImpl(std::vector<std::vector<CoeffField>> a, std::vector<std::vector<ScalarField>> f, double lambda,
               double Lambda)
        : a(std::move(a)), f(std::move(f)), lam(lambda), Lam(Lambda) {}
    Nonlinearity::Kind kind() const override { return Nonlinearity::Kind::isaacs; }
    double lambda() const override { return lam; }
    double Lambda() const override { return Lam; }
    double kappa(const Domain& d) const override {
        double k = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a[i].size(); ++j) {
                k = std::max(k, a[i][j].nuclear_lipschitz(d));
                if (!f.empty() && !f[i][j].is_constant()) k = std::max(k, f[i][j].lipschitz_bound(d));
            }
        return k;
    }
    bool normalized() const override {
        if (f.empty()) return true;
        std::vector<double> origin(a.front().front().dim(), 0.0);
        for (const auto& row : f)
            for (const auto& s : row)
                if (!s.is_constant() || s.value(origin) != 0.0) return false;
        return true;
    }
    bool x_independent() const override {
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < a[i].size(); ++j) {
                if (!a[i][j].is_constant()) return false;
                if (!f.empty() && !f[i][j].is_constant()) return false;
            }
        return true;
    }
    std::string describe() const override {
        std::ostringstream os;
        os << "isaacs(" << a.size() << " controls)";
        return os.str();
    }
    double running(std::size_t i, std::size_t j, std::span<const double> x) const {
        return f.empty() ? 0.0 : f[i][j].value(x);
    }
    double eval(const SymMat& X, std::span<const double> x) const override {
        double amax = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a.size(); ++i) {
            double bmin = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < a[i].size(); ++j)
                bmin = std::min(bmin, frobenius_dot(a[i][j].value(x), X) + running(i, j, x));
            amax = std::max(amax, bmin);
        }
        return amax;
    }
    GameForm game_form(std::span<const double> x, int) const override {
        GameGroup g;
        for (std::size_t i = 0; i < a.size(); ++i) {
            GameAlpha alpha;
            for (std::size_t j = 0; j < a[i].size(); ++j) alpha.push_back(GameLeaf{a[i][j].value(x), running(i, j, x)});
            g.push_back(std::move(alpha));
        }
        return GameForm{{std::move(g)}};
    }
    std::vector<std::vector<CoeffField>> a;
    std::vector<std::vector<ScalarField>> f;
    double lam, Lam;
};

struct PerturbedImpl final : NonlinearityImpl {
    PerturbedImpl(Nonlinearity base, double eps, double res, int sign, Domain domain)
        : base(std::move(base)), eps(eps), res(res), sign(sign), domain(std::move(domain)) {}
    Nonlinearity::Kind kind() const override { return Nonlinearity::Kind::perturbed; }
    double lambda() const override { return base.lambda(); }
    double Lambda() const override { return base.Lambda(); }
    double kappa(const Domain& d) const override { return base.kappa(d); }
    bool normalized() const override { return base.normalized(); }
    bool x_independent() const override { return base.x_independent(); }
    std::string describe() const override {
        std::ostringstream os;
        os << base.describe() << (sign < 0 ? "_eps" : "^eps") << "(" << eps << ")";
        return os.str();
    }
    double eval(const SymMat& X, std::span<const double> x) const override {
        if (base.x_independent()) return base.eval(X, x);
        double best = sign < 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        for (const auto& y : ball_samples(x, eps, res, domain)) {
            double v = base.eval(X, y);
            best = sign < 0 ? std::min(best, v) : std::max(best, v);
        }
        return best;
    }
    GameForm game_form(std::span<const double> x, int dim) const override {
        if (base.x_independent()) return base.game_form(x, dim);
        GameForm out;
        if (sign < 0) {
            // inf over samples of a min over groups: the samples become groups.
            for (const auto& y : ball_samples(x, eps, res, domain)) {
                auto g = base.game_form(y, dim);
                for (auto& grp : g.groups) out.groups.push_back(std::move(grp));
            }
        } else {
            // sup over samples of a single-group form: the samples join the α level.
            GameGroup merged;
            for (const auto& y : ball_samples(x, eps, res, domain)) {
                auto g = base.game_form(y, dim);
                if (g.groups.size() != 1)
                    throw Error("perturb_sup: base operator '" + base.describe() + "' is not a single sup-inf game");
                for (auto& a : g.groups.front()) merged.push_back(std::move(a));
            }
            out.groups.push_back(std::move(merged));
        }
        return out;
    }
    Nonlinearity base;
    double eps, res;
    int sign;
    Domain domain;
};

struct FrozenImpl final : NonlinearityImpl {
    FrozenImpl(Nonlinearity base, Point x0) : base(std::move(base)), x0(std::move(x0)) {}
    Nonlinearity::Kind kind() const override { return Nonlinearity::Kind::frozen; }
    double lambda() const override { return base.lambda(); }
    double Lambda() const override { return base.Lambda(); }
    double kappa(const Domain&) const override { return 0.0; }
    bool normalized() const override { return base.normalized(); }
    bool x_independent() const override { return true; }
    std::string describe() const override { return "frozen(" + base.describe() + ")"; }
    double eval(const SymMat& X, std::span<const double>) const override { return base.eval(X, x0); }
    GameForm game_form(std::span<const double>, int dim) const override { return base.game_form(x0, dim); }
    Nonlinearity base;
    Point x0;
};

struct ExtremalFieldNode final : detail::FieldNode {
    ExtremalFieldNode(ScalarField base, double eps, double res, int sign, Domain domain)
        : base(std::move(base)), eps(eps), res(res), sign(sign), domain(std::move(domain)) {}
    double value(std::span<const double> x) const override {
        if (base.is_constant()) return base.value(x);
        double best = sign < 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        for (const auto& y : ball_samples(x, eps, res, domain)) {
            double v = base.value(y);
            best = sign < 0 ? std::min(best, v) : std::max(best, v);
        }
        return best;
    }
    double lipschitz(const Domain& d) const override { return base.lipschitz_bound(d); }
    bool constant() const override { return base.is_constant(); }
    std::string describe() const override { return base.describe() + (sign < 0 ? "_eps" : "^eps"); }
    ScalarField base;
    double eps, res;
    int sign;
    Domain domain;
};

struct ManufacturedNode final : detail::FieldNode {
    ManufacturedNode(ScalarField u, Nonlinearity F, double lip) : u(std::move(u)), F(std::move(F)), lip(lip) {}
    double value(std::span<const double> x) const override { return F.eval(u.hessian(x), x); }
    double lipschitz(const Domain&) const override { return lip; }
    std::string describe() const override { return "F(D2 " + u.describe() + ")"; }
    ScalarField u;
    Nonlinearity F;
    double lip;
};

double resolve_resolution(double eps, double resolution) {
    if (eps < 0.0) throw std::invalid_argument("perturbation radius eps must be >= 0");
    if (resolution > 0.0) return resolution;
    return eps > 0.0 ? eps / 8.0 : 1.0;
}

} // namespace

Nonlinearity Nonlinearity::linear(CoeffField a, double lambda, double Lambda) {
    check_constants(lambda, Lambda);
    if (a.dim() == 0) throw std::invalid_argument("linear: empty coefficient field");
    return Nonlinearity(std::make_shared<LinearImpl>(std::move(a), lambda, Lambda));
}

Nonlinearity Nonlinearity::pucci(double lambda, double Lambda, int sign) {
    check_constants(lambda, Lambda);
    if (sign == 0) throw std::invalid_argument("pucci: sign must be +1 or -1");
    return Nonlinearity(std::make_shared<PucciImpl>(lambda, Lambda, sign > 0 ? 1 : -1));
}

Nonlinearity Nonlinearity::isaacs(std::vector<std::vector<CoeffField>> a, std::vector<std::vector<ScalarField>> running,
                                  double lambda, double Lambda) {
    check_constants(lambda, Lambda);
    if (a.empty()) throw std::invalid_argument("isaacs: empty control set A");
    const int dim = a.front().empty() ? 0 : a.front().front().dim();
    for (const auto& row : a) {
        if (row.empty()) throw std::invalid_argument("isaacs: empty control set B");
        for (const auto& c : row)
            if (c.dim() != dim || dim == 0) throw std::invalid_argument("isaacs: coefficient dimension mismatch");
    }
    if (!running.empty()) {
        if (running.size() != a.size()) throw std::invalid_argument("isaacs: running terms shape mismatch");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (running[i].size() != a[i].size()) throw std::invalid_argument("isaacs: running terms shape mismatch");
    }
    return Nonlinearity(std::make_shared<IsaacsImpl>(std::move(a), std::move(running), lambda, Lambda));
}

Nonlinearity::Kind Nonlinearity::kind() const { return impl_->kind(); }
double Nonlinearity::lambda() const { return impl_->lambda(); }
double Nonlinearity::Lambda() const { return impl_->Lambda(); }
double Nonlinearity::kappa(const Domain& domain) const { return impl_->kappa(domain); }
bool Nonlinearity::normalized() const { return impl_->normalized(); }
bool Nonlinearity::x_independent() const { return impl_->x_independent(); }
std::string Nonlinearity::describe() const { return impl_->describe(); }

double Nonlinearity::eval(const SymMat& X, std::span<const double> x) const { return impl_->eval(X, x); }

double Nonlinearity::zero_order(std::span<const double> x) const {
    return impl_->eval(SymMat(static_cast<int>(x.size())), x);
}

GameForm Nonlinearity::game_form(std::span<const double> x, int dim) const { return impl_->game_form(x, dim); }

std::vector<Point> ball_samples(std::span<const double> x, double eps, double resolution, const Domain& domain) {
    const int n = static_cast<int>(x.size());
    std::vector<Point> out;
    out.emplace_back(x.begin(), x.end());
    if (eps <= 0.0) return out;
    const auto K = static_cast<int>(std::floor(eps / resolution + 1e-9));
    const double r2 = eps * eps * (1.0 + 1e-12);
    const double tol = 1e-12 * std::max(1.0, domain.diameter());
    std::vector<int> k(n, -K);
    Point y(n);
    while (true) {
        double s = 0.0;
        bool origin = true;
        for (int i = 0; i < n; ++i) {
            double d = k[i] * resolution;
            s += d * d;
            y[i] = x[i] + d;
            origin = origin && k[i] == 0;
        }
        if (!origin && s <= r2 && domain.contains(y, tol)) out.push_back(y);
        int i = n - 1;
        while (i >= 0 && k[i] == K) k[i--] = -K;
        if (i < 0) break;
        ++k[i];
    }
    return out;
}

Nonlinearity perturb_inf(const Nonlinearity& F, double eps, const Domain& domain, double resolution) {
    double res = resolve_resolution(eps, resolution);
    return Nonlinearity(std::make_shared<PerturbedImpl>(F, eps, res, -1, domain));
}

Nonlinearity perturb_sup(const Nonlinearity& F, double eps, const Domain& domain, double resolution) {
    double res = resolve_resolution(eps, resolution);
    return Nonlinearity(std::make_shared<PerturbedImpl>(F, eps, res, +1, domain));
}

ScalarField field_inf(const ScalarField& f, double eps, const Domain& domain, double resolution) {
    double res = resolve_resolution(eps, resolution);
    return ScalarField(std::make_shared<ExtremalFieldNode>(f, eps, res, -1, domain));
}

ScalarField field_sup(const ScalarField& f, double eps, const Domain& domain, double resolution) {
    double res = resolve_resolution(eps, resolution);
    return ScalarField(std::make_shared<ExtremalFieldNode>(f, eps, res, +1, domain));
}

Nonlinearity freeze(const Nonlinearity& F, std::span<const double> x0) {
    return Nonlinearity(std::make_shared<FrozenImpl>(F, Point(x0.begin(), x0.end())));
}

namespace {

Point random_point(const Domain& d, std::mt19937_64& rng) {
    const int n = d.dim();
    Point x(n);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        for (int k = 0; k < n; ++k) {
            auto [lo, hi] = d.axis_range(k);
            x[k] = std::uniform_real_distribution<double>(lo, hi)(rng);
        }
        if (d.contains(x)) return x;
    }
    return d.barycenter();
}

SymMat random_sym(int n, double scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-scale, scale);
    SymMat m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, u(rng));
    return m;
}

SymMat random_psd(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    const int rank = std::uniform_int_distribution<int>(1, n)(rng);
    SymMat y(n);
    for (int r = 0; r < rank; ++r) {
        std::vector<double> v(n);
        for (double& c : v) c = g(rng);
        y += SymMat::outer(v);
    }
    return y;
}

} // namespace

EllipticityReport check_ellipticity(const Nonlinearity& F, const Domain& domain, int trials, std::uint64_t seed) {
    if (trials < 1) throw std::invalid_argument("check_ellipticity: trials must be >= 1");
    EllipticityReport rep;
    rep.trials = trials;
    const int n = domain.dim();
    for (int t = 0; t < trials; ++t) {
        auto rng = stream(seed, static_cast<std::uint64_t>(t));
        Point x = random_point(domain, rng);
        SymMat X = random_sym(n, 5.0, rng);
        SymMat Y = random_psd(n, rng);
        double fx = F.eval(X, x);
        double inc = F.eval(X + Y, x) - fx;
        double tr = Y.trace();
        double slack = 1e-9 * (1.0 + std::fabs(fx) + std::fabs(inc));
        double excess = std::max(F.lambda() * tr - inc, inc - F.Lambda() * tr);
        if (excess > slack) {
            ++rep.violations;
            rep.worst_excess = std::max(rep.worst_excess, excess);
        }
    }
    return rep;
}

ManufacturedProblem manufactured_problem(const ScalarField& u, const Nonlinearity& F, const Domain& domain) {
    if (!u.has_exact_derivatives())
        throw std::invalid_argument("manufactured_problem: exact solution '" + u.describe() + "' has no exact Hessian");
    const double n = domain.dim();
    double lip = F.kappa(domain) * (u.hessian_bound(domain) + 1.0) + F.Lambda() * n * u.third_derivative_bound(domain);
    ManufacturedProblem p;
    p.f = ScalarField(std::make_shared<ManufacturedNode>(u, F, lip));
    p.g = u;
    return p;
}

} // namespace nonlin
