#include "nonlin/symmat.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nonlin {

SymMat SymMat::identity(int n, double scale) {
    SymMat m(n);
    for (int i = 0; i < n; ++i) m.set(i, i, scale);
    return m;
}

SymMat SymMat::diagonal(std::span<const double> d) {
    SymMat m(static_cast<int>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) m.set(static_cast<int>(i), static_cast<int>(i), d[i]);
    return m;
}

SymMat SymMat::from_rows(const std::vector<std::vector<double>>& rows) {
    const int n = static_cast<int>(rows.size());
    SymMat m(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(rows[i].size()) != n) throw std::invalid_argument("SymMat: matrix is not square");
        for (int j = 0; j < n; ++j) {
            if (rows[i][j] != rows[j][i]) throw std::invalid_argument("SymMat: matrix is not symmetric");
            if (j >= i) m.set(i, j, rows[i][j]);
        }
    }
    return m;
}

SymMat SymMat::outer(std::span<const double> v) {
    const int n = static_cast<int>(v.size());
    SymMat m(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) m.set(i, j, v[i] * v[j]);
    return m;
}

SymMat& SymMat::operator+=(const SymMat& o) {
    if (o.n_ != n_) throw std::invalid_argument("SymMat: dimension mismatch");
    for (std::size_t k = 0; k < upper_.size(); ++k) upper_[k] += o.upper_[k];
    return *this;
}

SymMat& SymMat::operator-=(const SymMat& o) {
    if (o.n_ != n_) throw std::invalid_argument("SymMat: dimension mismatch");
    for (std::size_t k = 0; k < upper_.size(); ++k) upper_[k] -= o.upper_[k];
    return *this;
}

SymMat& SymMat::operator*=(double s) {
    for (double& v : upper_) v *= s;
    return *this;
}

double SymMat::trace() const {
    double t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double SymMat::quad(std::span<const double> v) const {
    double s = 0.0;
    for (int i = 0; i < n_; ++i) {
        s += (*this)(i, i) * v[i] * v[i];
        for (int j = i + 1; j < n_; ++j) s += 2.0 * (*this)(i, j) * v[i] * v[j];
    }
    return s;
}

std::vector<double> SymMat::apply(std::span<const double> v) const {
    std::vector<double> out(n_, 0.0);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) out[i] += (*this)(i, j) * v[j];
    return out;
}

std::vector<double> SymMat::eigenvalues() const {
    Eigen::MatrixXd m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n_);
    return ev;
}

std::vector<std::vector<double>> SymMat::rows() const {
    std::vector<std::vector<double>> r(n_, std::vector<double>(n_));
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) r[i][j] = (*this)(i, j);
    return r;
}

double frobenius_dot(const SymMat& a, const SymMat& b) {
    const int n = a.dim();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        s += a(i, i) * b(i, i);
        for (int j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * b(i, j);
    }
    return s;
}

double spectral_norm(const SymMat& x) {
    if (x.dim() == 0) return 0.0;
    auto ev = x.eigenvalues();
    return std::max(std::fabs(ev.front()), std::fabs(ev.back()));
}

double nuclear_norm(const SymMat& x) {
    double s = 0.0;
    for (double e : x.eigenvalues()) s += std::fabs(e);
    return s;
}

} // namespace nonlin
