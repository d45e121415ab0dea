#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "nonlin/scheme.hpp"

namespace nonlin {

namespace {

// Packed upper triangle with √2 on off-diagonals, so the Euclidean norm of the
// packed vector is the Frobenius norm of the matrix.
Eigen::VectorXd pack(const SymMat& m) {
    const int n = m.dim();
    Eigen::VectorXd v(n * (n + 1) / 2);
    int r = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) v(r++) = (i == j ? 1.0 : std::sqrt(2.0)) * m(i, j);
    return v;
}

// Exact fits are not unique once the stencil has more directions than the
// matrix has entries. Among basic solutions, pick the one with the smallest
// Σ ω_y |v_y|, which is also the smallest consistency constant. Skipped when
// there are too many bases to enumerate.
void refine_cheapest(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Stencil& stencil,
                     DirectionalWeights& out) {
    const int m = static_cast<int>(b.size());
    const int k = static_cast<int>(A.cols());
    if (k <= m) return;
    double bases = 1.0;
    for (int i = 0; i < m; ++i) bases = bases * (k - i) / (i + 1);
    if (bases > 20000.0) return;

    auto cost = [&](const std::vector<double>& w) {
        double c = 0.0;
        for (int j = 0; j < k; ++j) c += w[static_cast<std::size_t>(j)] * stencil.length(static_cast<std::size_t>(j));
        return c;
    };
    double best = cost(out.weights);
    const double feas = 1e-12 * (1.0 + b.norm());
    std::vector<int> pick(static_cast<std::size_t>(m));
    std::iota(pick.begin(), pick.end(), 0);
    Eigen::MatrixXd B(m, m);
    std::vector<double> w(static_cast<std::size_t>(k));
    while (true) {
        for (int c = 0; c < m; ++c) B.col(c) = A.col(pick[static_cast<std::size_t>(c)]);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        if (lu.isInvertible()) {
            Eigen::VectorXd z = lu.solve(b);
            if (z.minCoeff() >= -feas) {
                std::fill(w.begin(), w.end(), 0.0);
                for (int c = 0; c < m; ++c) w[static_cast<std::size_t>(pick[static_cast<std::size_t>(c)])] = std::max(0.0, z(c));
                Eigen::Map<const Eigen::VectorXd> wv(w.data(), k);
                double res = (b - A * wv).norm();
                double c = cost(w);
                if (res <= 1e-12 * (1.0 + b.norm()) && c < best - 1e-12 * (1.0 + best)) {
                    best = c;
                    out.weights = w;
                    out.residual = res;
                }
            }
        }
        int i = m - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == k - m + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < m; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }
}

} // namespace

DirectionalWeights decompose_matrix(const SymMat& a, const Stencil& stencil) {
    if (a.dim() != stencil.dim()) throw std::invalid_argument("decompose_matrix: dimension mismatch");
    const auto k = static_cast<Eigen::Index>(stencil.size());
    const Eigen::VectorXd b = pack(a);
    Eigen::MatrixXd A(b.size(), k);
    for (Eigen::Index j = 0; j < k; ++j) A.col(j) = pack(stencil.projector(static_cast<std::size_t>(j)));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(k);
    std::vector<bool> passive(static_cast<std::size_t>(k), false);
    const double tol = 1e-13 * (1.0 + b.norm());

    auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < k; ++j)
            if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
        Eigen::MatrixXd Ap(b.size(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) Ap.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
        Eigen::VectorXd zp = Ap.completeOrthogonalDecomposition().solve(b);
        z.setZero(k);
        for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(static_cast<Eigen::Index>(c));
    };

    for (int outer = 0; outer < 3 * static_cast<int>(k) + 10; ++outer) {
        Eigen::VectorXd w = A.transpose() * (b - A * x);
        Eigen::Index best = -1;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (passive[static_cast<std::size_t>(j)]) continue;
            if (w(j) > tol && (best < 0 || w(j) > w(best))) best = j;
        }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;

        Eigen::VectorXd z;
        for (int inner = 0; inner < static_cast<int>(k) + 5; ++inner) {
            solve_passive(z);
            bool feasible = true;
            for (Eigen::Index j = 0; j < k; ++j)
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
            if (feasible) break;
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < k; ++j) {
                if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - z(j)));
            }
            x += alpha * (z - x);
            for (Eigen::Index j = 0; j < k; ++j) {
                if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
                    passive[static_cast<std::size_t>(j)] = false;
                    x(j) = 0.0;
                }
            }
        }
        x = z;
        for (Eigen::Index j = 0; j < k; ++j)
            if (x(j) < 0.0) x(j) = 0.0;
    }

    DirectionalWeights out;
    out.weights.assign(x.data(), x.data() + k);
    out.residual = (b - A * x).norm();
    if (out.exact()) refine_cheapest(A, b, stencil, out);
    return out;
}

} // namespace nonlin
