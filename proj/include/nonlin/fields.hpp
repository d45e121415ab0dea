#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nonlin/common.hpp"
#include "nonlin/mesh.hpp"
#include "nonlin/symmat.hpp"

namespace nonlin {

namespace detail {

struct FieldNode {
    virtual ~FieldNode() = default;
    virtual double value(std::span<const double> x) const = 0;
    virtual bool exact_derivatives() const { return false; }
    virtual void gradient(std::span<const double> x, std::span<double> out) const;
    virtual SymMat hessian(std::span<const double> x) const;
    /// Upper bounds on the closure of `domain`.
    virtual double lipschitz(const Domain& domain) const = 0;
    virtual double hessian_bound(const Domain& domain) const;
    /// sup over x and unit v of |D³φ(x)[v, v, v]|.
    virtual double third_bound(const Domain& domain) const;
    virtual bool constant() const { return false; }
    virtual std::string describe() const = 0;
};

} // namespace detail

/// Real function on the domain drawn from a closed-form catalog (constants,
/// affine, quadratic, axis cubics, sine products, exponentials and sums of
/// these), plus derived fields built by the operators module. Catalog members
/// carry exact gradients and Hessians and computable derivative bounds.
///
/// Immutable; copies share the underlying expression.
class ScalarField {
  public:
    ScalarField();
    explicit ScalarField(std::shared_ptr<const detail::FieldNode> node) : node_(std::move(node)) {}

    static ScalarField constant(double c);
    static ScalarField affine(double c, Point b);
    /// c + b·x + ½ xᵀ M x.
    static ScalarField quadratic(double c, Point b, SymMat m);
    /// a (x_axis - shift)³.
    static ScalarField cubic_axis(double a, int axis, double shift = 0.0);
    /// A Π_i sin(ω x_i) over `dim` axes.
    static ScalarField sin_product(double amplitude, double frequency, int dim);
    /// A exp(b·x).
    static ScalarField exponential(double amplitude, Point b);
    /// Opaque function with a caller-supplied Lipschitz bound; no derivatives.
    static ScalarField from_function(std::string name, std::function<double(std::span<const double>)> fn,
                                     double lipschitz);

    double value(std::span<const double> x) const { return node_->value(x); }
    double operator()(std::span<const double> x) const { return node_->value(x); }

    bool has_exact_derivatives() const { return node_->exact_derivatives(); }
    Point gradient(std::span<const double> x) const;
    SymMat hessian(std::span<const double> x) const { return node_->hessian(x); }

    double lipschitz_bound(const Domain& d) const { return node_->lipschitz(d); }
    double hessian_bound(const Domain& d) const { return node_->hessian_bound(d); }
    double third_derivative_bound(const Domain& d) const { return node_->third_bound(d); }
    bool is_constant() const { return node_->constant(); }
    std::string describe() const { return node_->describe(); }

    ScalarField operator+(const ScalarField& other) const;
    ScalarField scaled(double s) const;

    const std::shared_ptr<const detail::FieldNode>& node() const { return node_; }

  private:
    std::shared_ptr<const detail::FieldNode> node_;
};

/// Sample a field on every mesh point.
MeshFunction sample(const MeshPtr& mesh, const ScalarField& f);

/// Symmetric-matrix valued coefficient a(x) = Σ_t s_t(x) A_t with catalog
/// scalar fields s_t and constant symmetric matrices A_t.
class CoeffField {
  public:
    struct Term {
        ScalarField weight;
        SymMat matrix;
    };

    CoeffField() = default;
    explicit CoeffField(std::vector<Term> terms);
    static CoeffField constant(SymMat m);

    int dim() const { return terms_.empty() ? 0 : terms_.front().matrix.dim(); }
    SymMat value(std::span<const double> x) const;
    /// Bound on ‖a(x) - a(y)‖_* / |x - y| over the domain.
    double nuclear_lipschitz(const Domain& d) const;
    bool is_constant() const;
    const std::vector<Term>& terms() const { return terms_; }

  private:
    std::vector<Term> terms_;
};

} // namespace nonlin
