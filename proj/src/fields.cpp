#include "nonlin/fields.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nonlin {

namespace detail {

void FieldNode::gradient(std::span<const double>, std::span<double>) const {
    throw Error("field '" + describe() + "' has no exact gradient");
}

SymMat FieldNode::hessian(std::span<const double>) const {
    throw Error("field '" + describe() + "' has no exact Hessian");
}

double FieldNode::hessian_bound(const Domain&) const {
    throw Error("field '" + describe() + "' has no Hessian bound");
}

double FieldNode::third_bound(const Domain&) const {
    throw Error("field '" + describe() + "' has no third-derivative bound");
}

} // namespace detail

namespace {

using detail::FieldNode;

struct ConstantNode final : FieldNode {
    explicit ConstantNode(double c) : c(c) {}
    double value(std::span<const double>) const override { return c; }
    bool exact_derivatives() const override { return true; }
    void gradient(std::span<const double>, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    SymMat hessian(std::span<const double> x) const override { return SymMat(static_cast<int>(x.size())); }
    double lipschitz(const Domain&) const override { return 0.0; }
    double hessian_bound(const Domain&) const override { return 0.0; }
    double third_bound(const Domain&) const override { return 0.0; }
    bool constant() const override { return true; }
    std::string describe() const override { return "constant(" + std::to_string(c) + ")"; }
    double c;
};

struct QuadraticNode final : FieldNode {
    QuadraticNode(double c, Point b, SymMat m) : c(c), b(std::move(b)), m(std::move(m)) {}
    double value(std::span<const double> x) const override {
        double v = c + dot(b, x);
        if (m.dim() > 0) v += 0.5 * m.quad(x);
        return v;
    }
    bool exact_derivatives() const override { return true; }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = b[i];
        if (m.dim() > 0) {
            auto mx = m.apply(x);
            for (std::size_t i = 0; i < x.size(); ++i) out[i] += mx[i];
        }
    }
    SymMat hessian(std::span<const double> x) const override {
        return m.dim() > 0 ? m : SymMat(static_cast<int>(x.size()));
    }
    double lipschitz(const Domain& d) const override {
        double mn = m.dim() > 0 ? spectral_norm(m) : 0.0;
        return mn * d.max_abs() + norm(b);
    }
    double hessian_bound(const Domain&) const override { return m.dim() > 0 ? spectral_norm(m) : 0.0; }
    double third_bound(const Domain&) const override { return 0.0; }
    std::string describe() const override { return m.dim() > 0 ? "quadratic" : "affine"; }
    double c;
    Point b;
    SymMat m;
};

struct CubicAxisNode final : FieldNode {
    CubicAxisNode(double a, int axis, double shift) : a(a), axis(axis), shift(shift) {}
    double value(std::span<const double> x) const override {
        double t = x[axis] - shift;
        return a * t * t * t;
    }
    bool exact_derivatives() const override { return true; }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
        double t = x[axis] - shift;
        out[axis] = 3.0 * a * t * t;
    }
    SymMat hessian(std::span<const double> x) const override {
        SymMat h(static_cast<int>(x.size()));
        h.set(axis, axis, 6.0 * a * (x[axis] - shift));
        return h;
    }
    double reach(const Domain& d) const {
        auto [lo, hi] = d.axis_range(axis);
        return std::max(std::fabs(lo - shift), std::fabs(hi - shift));
    }
    double lipschitz(const Domain& d) const override {
        double r = reach(d);
        return 3.0 * std::fabs(a) * r * r;
    }
    double hessian_bound(const Domain& d) const override { return 6.0 * std::fabs(a) * reach(d); }
    double third_bound(const Domain&) const override { return 6.0 * std::fabs(a); }
    std::string describe() const override { return "cubic_axis"; }
    double a;
    int axis;
    double shift;
};

struct SinProductNode final : FieldNode {
    SinProductNode(double amp, double freq, int dim) : amp(amp), freq(freq), dim(dim) {}
    double value(std::span<const double> x) const override {
        double v = amp;
        for (int i = 0; i < dim; ++i) v *= std::sin(freq * x[i]);
        return v;
    }
    bool exact_derivatives() const override { return true; }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        for (int i = 0; i < dim; ++i) {
            double g = amp * freq * std::cos(freq * x[i]);
            for (int j = 0; j < dim; ++j)
                if (j != i) g *= std::sin(freq * x[j]);
            out[i] = g;
        }
    }
    SymMat hessian(std::span<const double> x) const override {
        SymMat h(dim);
        for (int i = 0; i < dim; ++i) {
            for (int j = i; j < dim; ++j) {
                double v = amp * freq * freq;
                for (int k = 0; k < dim; ++k) {
                    if (i == j && k == i) v *= -std::sin(freq * x[k]);
                    else if (k == i || k == j) v *= std::cos(freq * x[k]);
                    else v *= std::sin(freq * x[k]);
                }
                h.set(i, j, v);
            }
        }
        return h;
    }
    double lipschitz(const Domain&) const override { return std::fabs(amp) * freq * std::sqrt(double(dim)); }
    double hessian_bound(const Domain&) const override { return std::fabs(amp) * freq * freq * dim; }
    double third_bound(const Domain&) const override {
        return std::fabs(amp) * freq * freq * freq * std::pow(double(dim), 1.5);
    }
    std::string describe() const override { return "sin_product"; }
    double amp;
    double freq;
    int dim;
};

struct ExponentialNode final : FieldNode {
    ExponentialNode(double amp, Point b) : amp(amp), b(std::move(b)) {}
    double value(std::span<const double> x) const override { return amp * std::exp(dot(b, x)); }
    bool exact_derivatives() const override { return true; }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        double e = value(x);
        for (std::size_t i = 0; i < b.size(); ++i) out[i] = e * b[i];
    }
    SymMat hessian(std::span<const double> x) const override {
        SymMat h = SymMat::outer(b);
        h *= value(x);
        return h;
    }
    double sup_exp(const Domain& d) const {
        double s = 0.0;
        if (d.kind() == Domain::Kind::ball) {
            s = dot(b, d.center()) + norm(b) * d.radius();
        } else {
            for (std::size_t k = 0; k < b.size(); ++k) s += std::max(b[k] * d.lo()[k], b[k] * d.hi()[k]);
        }
        return std::exp(s);
    }
    double lipschitz(const Domain& d) const override { return std::fabs(amp) * norm(b) * sup_exp(d); }
    double hessian_bound(const Domain& d) const override {
        double nb = norm(b);
        return std::fabs(amp) * nb * nb * sup_exp(d);
    }
    double third_bound(const Domain& d) const override {
        double nb = norm(b);
        return std::fabs(amp) * nb * nb * nb * sup_exp(d);
    }
    std::string describe() const override { return "exponential"; }
    double amp;
    Point b;
};

struct FunctionNode final : FieldNode {
    FunctionNode(std::string name, std::function<double(std::span<const double>)> fn, double lip)
        : name(std::move(name)), fn(std::move(fn)), lip(lip) {}
    double value(std::span<const double> x) const override { return fn(x); }
    double lipschitz(const Domain&) const override { return lip; }
    std::string describe() const override { return name; }
    std::string name;
    std::function<double(std::span<const double>)> fn;
    double lip;
};

struct SumNode final : FieldNode {
    SumNode(std::shared_ptr<const FieldNode> a, std::shared_ptr<const FieldNode> b)
        : a(std::move(a)), b(std::move(b)) {}
    double value(std::span<const double> x) const override { return a->value(x) + b->value(x); }
    bool exact_derivatives() const override { return a->exact_derivatives() && b->exact_derivatives(); }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        std::vector<double> tmp(out.size());
        a->gradient(x, out);
        b->gradient(x, tmp);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
    }
    SymMat hessian(std::span<const double> x) const override { return a->hessian(x) + b->hessian(x); }
    double lipschitz(const Domain& d) const override { return a->lipschitz(d) + b->lipschitz(d); }
    double hessian_bound(const Domain& d) const override { return a->hessian_bound(d) + b->hessian_bound(d); }
    double third_bound(const Domain& d) const override { return a->third_bound(d) + b->third_bound(d); }
    bool constant() const override { return a->constant() && b->constant(); }
    std::string describe() const override { return a->describe() + " + " + b->describe(); }
    std::shared_ptr<const FieldNode> a, b;
};

struct ScaledNode final : FieldNode {
    ScaledNode(std::shared_ptr<const FieldNode> base, double s) : base(std::move(base)), s(s) {}
    double value(std::span<const double> x) const override { return s * base->value(x); }
    bool exact_derivatives() const override { return base->exact_derivatives(); }
    void gradient(std::span<const double> x, std::span<double> out) const override {
        base->gradient(x, out);
        for (double& v : out) v *= s;
    }
    SymMat hessian(std::span<const double> x) const override { return s * base->hessian(x); }
    double lipschitz(const Domain& d) const override { return std::fabs(s) * base->lipschitz(d); }
    double hessian_bound(const Domain& d) const override { return std::fabs(s) * base->hessian_bound(d); }
    double third_bound(const Domain& d) const override { return std::fabs(s) * base->third_bound(d); }
    bool constant() const override { return base->constant(); }
    std::string describe() const override {
        std::ostringstream os;
        os << s << "*(" << base->describe() << ")";
        return os.str();
    }
    std::shared_ptr<const FieldNode> base;
    double s;
};

} // namespace

ScalarField::ScalarField() : node_(std::make_shared<ConstantNode>(0.0)) {}

ScalarField ScalarField::constant(double c) { return ScalarField(std::make_shared<ConstantNode>(c)); }

ScalarField ScalarField::affine(double c, Point b) {
    return ScalarField(std::make_shared<QuadraticNode>(c, std::move(b), SymMat()));
}

ScalarField ScalarField::quadratic(double c, Point b, SymMat m) {
    if (static_cast<int>(b.size()) != m.dim()) throw std::invalid_argument("quadratic: dimension mismatch");
    return ScalarField(std::make_shared<QuadraticNode>(c, std::move(b), std::move(m)));
}

ScalarField ScalarField::cubic_axis(double a, int axis, double shift) {
    if (axis < 0) throw std::invalid_argument("cubic_axis: negative axis");
    return ScalarField(std::make_shared<CubicAxisNode>(a, axis, shift));
}

ScalarField ScalarField::sin_product(double amplitude, double frequency, int dim) {
    if (dim < 1) throw std::invalid_argument("sin_product: dim must be >= 1");
    return ScalarField(std::make_shared<SinProductNode>(amplitude, frequency, dim));
}

ScalarField ScalarField::exponential(double amplitude, Point b) {
    return ScalarField(std::make_shared<ExponentialNode>(amplitude, std::move(b)));
}

ScalarField ScalarField::from_function(std::string name, std::function<double(std::span<const double>)> fn,
                                       double lipschitz) {
    return ScalarField(std::make_shared<FunctionNode>(std::move(name), std::move(fn), lipschitz));
}

Point ScalarField::gradient(std::span<const double> x) const {
    Point g(x.size());
    node_->gradient(x, g);
    return g;
}

ScalarField ScalarField::operator+(const ScalarField& other) const {
    return ScalarField(std::make_shared<SumNode>(node_, other.node_));
}

ScalarField ScalarField::scaled(double s) const { return ScalarField(std::make_shared<ScaledNode>(node_, s)); }

MeshFunction sample(const MeshPtr& mesh, const ScalarField& f) {
    return MeshFunction::sample(mesh, [&](std::span<const double> x) { return f.value(x); });
}

CoeffField::CoeffField(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("CoeffField: no terms");
    for (const auto& t : terms_)
        if (t.matrix.dim() != terms_.front().matrix.dim())
            throw std::invalid_argument("CoeffField: matrix dimension mismatch");
}

CoeffField CoeffField::constant(SymMat m) { return CoeffField({Term{ScalarField::constant(1.0), std::move(m)}}); }

SymMat CoeffField::value(std::span<const double> x) const {
    SymMat a(dim());
    for (const auto& t : terms_) {
        double s = t.weight.value(x);
        SymMat m = t.matrix;
        m *= s;
        a += m;
    }
    return a;
}

double CoeffField::nuclear_lipschitz(const Domain& d) const {
    double k = 0.0;
    for (const auto& t : terms_) {
        if (t.weight.is_constant()) continue;
        k += t.weight.lipschitz_bound(d) * nuclear_norm(t.matrix);
    }
    return k;
}

bool CoeffField::is_constant() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.weight.is_constant(); });
}

} // namespace nonlin
