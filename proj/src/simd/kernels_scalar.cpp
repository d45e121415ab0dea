#include <cmath>

#include "nonlin/simd/kernels.hpp"

namespace nonlin::simd::scalar {

ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta) {
    ArgMax best;
    for (std::size_t j = 0; j < c.count; ++j) {
        double acc = c.values[j];
        for (int k = c.dim - 1; k >= 0; --k) {
            double d = x[k] - c.coords[k][j];
            acc = acc - (d * d) / two_theta;
        }
        if (acc > best.value) {
            best.value = acc;
            best.index = j;
        }
    }
    return best;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > m) m = d;
    }
    return m;
}

} // namespace nonlin::simd::scalar
