#pragma once

#include <span>
#include <vector>

namespace nonlin {

/// Real symmetric n×n matrix. Only the upper triangle is stored, so symmetry
/// holds exactly.
class SymMat {
  public:
    SymMat() = default;
    explicit SymMat(int n) : n_(n), upper_(static_cast<std::size_t>(n * (n + 1) / 2), 0.0) {}

    static SymMat identity(int n, double scale = 1.0);
    static SymMat diagonal(std::span<const double> d);
    /// Throws std::invalid_argument unless `rows` is square and exactly symmetric.
    static SymMat from_rows(const std::vector<std::vector<double>>& rows);
    /// v vᵀ.
    static SymMat outer(std::span<const double> v);

    int dim() const { return n_; }
    double operator()(int i, int j) const { return upper_[slot(i, j)]; }
    void set(int i, int j, double v) { upper_[slot(i, j)] = v; }
    std::span<const double> packed() const { return upper_; }

    SymMat& operator+=(const SymMat& o);
    SymMat& operator-=(const SymMat& o);
    SymMat& operator*=(double s);

    double trace() const;
    /// vᵀ X v.
    double quad(std::span<const double> v) const;
    /// Matrix-vector product.
    std::vector<double> apply(std::span<const double> v) const;
    /// Eigenvalues in ascending order.
    std::vector<double> eigenvalues() const;

    std::vector<std::vector<double>> rows() const;

    friend bool operator==(const SymMat& a, const SymMat& b) = default;

  private:
    std::size_t slot(int i, int j) const {
        if (i > j) std::swap(i, j);
        return static_cast<std::size_t>(i * n_ - i * (i - 1) / 2 + (j - i));
    }

    int n_ = 0;
    std::vector<double> upper_;
};

inline SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
inline SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
inline SymMat operator*(double s, SymMat a) { return a *= s; }

/// trace(A B) = Σ_ij a_ij b_ij.
double frobenius_dot(const SymMat& a, const SymMat& b);
/// ‖X‖ = sup_{|v|=1} |Xv|, the largest absolute eigenvalue.
double spectral_norm(const SymMat& x);
/// Σ |eigenvalues|; bounds |trace(A X)| ≤ ‖A‖_* ‖X‖.
double nuclear_norm(const SymMat& x);

} // namespace nonlin
