#include <arm_neon.h>

#include <cmath>
#include <cstdint>

#include "nonlin/simd/kernels.hpp"

namespace nonlin::simd::neon {

ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta) {
    const float64x2_t tt = vdupq_n_f64(two_theta);
    float64x2_t best = vdupq_n_f64(-INFINITY);
    int64x2_t best_idx = vdupq_n_s64(-1);
    const int64_t init[2] = {0, 1};
    int64x2_t idx = vld1q_s64(init);
    const int64x2_t step = vdupq_n_s64(2);

    std::size_t j = 0;
    for (; j + 2 <= c.count; j += 2) {
        float64x2_t acc = vld1q_f64(c.values + j);
        for (int k = c.dim - 1; k >= 0; --k) {
            float64x2_t d = vsubq_f64(vdupq_n_f64(x[k]), vld1q_f64(c.coords[k] + j));
            acc = vsubq_f64(acc, vdivq_f64(vmulq_f64(d, d), tt));
        }
        uint64x2_t gt = vcgtq_f64(acc, best);
        best = vbslq_f64(gt, acc, best);
        best_idx = vbslq_s64(gt, idx, best_idx);
        idx = vaddq_s64(idx, step);
    }

    ArgMax result;
    for (; j < c.count; ++j) {
        double acc = c.values[j];
        for (int k = c.dim - 1; k >= 0; --k) {
            double d = x[k] - c.coords[k][j];
            acc = acc - (d * d) / two_theta;
        }
        if (acc > result.value) {
            result.value = acc;
            result.index = j;
        }
    }

    double lane_value[2];
    int64_t lane_index[2];
    vst1q_f64(lane_value, best);
    vst1q_s64(lane_index, best_idx);
    for (int l = 0; l < 2; ++l) {
        if (lane_index[l] < 0) continue;
        auto i = static_cast<std::size_t>(lane_index[l]);
        if (lane_value[l] > result.value || (lane_value[l] == result.value && i < result.index)) {
            result.value = lane_value[l];
            result.index = i;
        }
    }
    return result;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    float64x2_t m = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        m = vmaxq_f64(m, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    }
    double r = vmaxvq_f64(m);
    for (; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > r) r = d;
    }
    return r;
}

} // namespace nonlin::simd::neon
