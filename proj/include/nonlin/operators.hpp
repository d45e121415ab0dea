#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nonlin/fields.hpp"
#include "nonlin/mesh.hpp"
#include "nonlin/symmat.hpp"

namespace nonlin {

/// Linear piece trace(a X) + c of a min-max-min game.
struct GameLeaf {
    SymMat a;
    double c = 0.0;
};
using GameAlpha = std::vector<GameLeaf>;  // min over β
using GameGroup = std::vector<GameAlpha>; // max over α

/// F(X) = min_g max_α min_β { trace(a X) + c } at a fixed point x. Every
/// nonlinearity in this library has this form pointwise.
struct GameForm {
    std::vector<GameGroup> groups;
    double eval(const SymMat& x) const;
    std::size_t leaf_count() const;
};

namespace detail {
struct NonlinearityImpl;
}

/// Continuum operator F(X, x), uniformly elliptic with constants λ ≤ Λ in the
/// sense λ tr Y ≤ F(X + Y, x) - F(X, x) ≤ Λ tr Y for Y ≥ 0.
class Nonlinearity {
  public:
    enum class Kind { linear, pucci, isaacs, perturbed, frozen };

    /// trace(a(x) X).
    static Nonlinearity linear(CoeffField a, double lambda, double Lambda);
    /// sign > 0: maximal operator Λ Σ e⁺ - λ Σ e⁻; sign < 0: minimal one.
    static Nonlinearity pucci(double lambda, double Lambda, int sign);
    /// sup_α inf_β { trace(a^{αβ}(x) X) + f^{αβ}(x) }. `running` may be empty
    /// (all zero) or match the shape of `a`.
    static Nonlinearity isaacs(std::vector<std::vector<CoeffField>> a,
                               std::vector<std::vector<ScalarField>> running, double lambda, double Lambda);

    Kind kind() const;
    double lambda() const;
    double Lambda() const;
    /// Lipschitz constant in x: |F(X,x) - F(X,y)| ≤ κ |x - y| (‖X‖ + 1).
    double kappa(const Domain& domain) const;
    /// F(0, x) = 0 for every x.
    bool normalized() const;
    bool x_independent() const;
    std::string describe() const;

    double eval(const SymMat& X, std::span<const double> x) const;
    double operator()(const SymMat& X, std::span<const double> x) const { return eval(X, x); }
    /// F(0, x).
    double zero_order(std::span<const double> x) const;
    GameForm game_form(std::span<const double> x, int dim) const;

    const std::shared_ptr<const detail::NonlinearityImpl>& impl() const { return impl_; }
    explicit Nonlinearity(std::shared_ptr<const detail::NonlinearityImpl> impl) : impl_(std::move(impl)) {}

  private:
    std::shared_ptr<const detail::NonlinearityImpl> impl_;
};

namespace detail {
struct NonlinearityImpl {
    virtual ~NonlinearityImpl() = default;
    virtual Nonlinearity::Kind kind() const = 0;
    virtual double lambda() const = 0;
    virtual double Lambda() const = 0;
    virtual double kappa(const Domain& d) const = 0;
    virtual bool normalized() const = 0;
    virtual bool x_independent() const = 0;
    virtual std::string describe() const = 0;
    virtual double eval(const SymMat& X, std::span<const double> x) const = 0;
    virtual GameForm game_form(std::span<const double> x, int dim) const = 0;
};
} // namespace detail

/// Sub-lattice x + res·Zⁿ inside B_eps(x) ∩ closure(U); always contains x.
std::vector<Point> ball_samples(std::span<const double> x, double eps, double resolution, const Domain& domain);

/// F_ε(X, x) = min over ball_samples of F(X, y). resolution <= 0 means eps/8.
Nonlinearity perturb_inf(const Nonlinearity& F, double eps, const Domain& domain, double resolution = 0.0);
/// F^ε(X, x) = max over ball_samples of F(X, y).
Nonlinearity perturb_sup(const Nonlinearity& F, double eps, const Domain& domain, double resolution = 0.0);
ScalarField field_inf(const ScalarField& f, double eps, const Domain& domain, double resolution = 0.0);
ScalarField field_sup(const ScalarField& f, double eps, const Domain& domain, double resolution = 0.0);

/// Constant-coefficient operator X ↦ F(X, x0).
Nonlinearity freeze(const Nonlinearity& F, std::span<const double> x0);

struct EllipticityReport {
    int trials = 0;
    int violations = 0;
    double worst_excess = 0.0; // largest amount by which a bound was missed
};

/// Random (X, x, Y ≥ 0) trials of λ tr Y ≤ F(X+Y, x) - F(X, x) ≤ Λ tr Y with
/// 1e-9 relative slack.
EllipticityReport check_ellipticity(const Nonlinearity& F, const Domain& domain, int trials, std::uint64_t seed);

struct ManufacturedProblem {
    ScalarField f;
    ScalarField g;
};

/// f(x) = F(D²u(x), x), g = u.
ManufacturedProblem manufactured_problem(const ScalarField& u, const Nonlinearity& F, const Domain& domain);

} // namespace nonlin
