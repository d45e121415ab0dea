#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "nonlin/simd/kernels.hpp"

namespace nonlin::simd::avx2 {

namespace {

// Lane-wise winners are first occurrences, so the global winner is the lane
// (or tail) maximum with the smallest index.
ArgMax merge(const double* lane_value, const std::int64_t* lane_index, int lanes, ArgMax tail) {
    ArgMax best = tail;
    for (int l = 0; l < lanes; ++l) {
        if (lane_index[l] < 0) continue;
        auto idx = static_cast<std::size_t>(lane_index[l]);
        if (lane_value[l] > best.value || (lane_value[l] == best.value && idx < best.index)) {
            best.value = lane_value[l];
            best.index = idx;
        }
    }
    return best;
}

} // namespace

ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta) {
    const __m256d tt = _mm256_set1_pd(two_theta);
    __m256d best = _mm256_set1_pd(-INFINITY);
    __m256i best_idx = _mm256_set1_epi64x(-1);
    __m256i idx = _mm256_setr_epi64x(0, 1, 2, 3);
    const __m256i step = _mm256_set1_epi64x(4);

    std::size_t j = 0;
    for (; j + 4 <= c.count; j += 4) {
        __m256d acc = _mm256_loadu_pd(c.values + j);
        for (int k = c.dim - 1; k >= 0; --k) {
            __m256d d = _mm256_sub_pd(_mm256_set1_pd(x[k]), _mm256_loadu_pd(c.coords[k] + j));
            acc = _mm256_sub_pd(acc, _mm256_div_pd(_mm256_mul_pd(d, d), tt));
        }
        __m256d gt = _mm256_cmp_pd(acc, best, _CMP_GT_OQ);
        best = _mm256_blendv_pd(best, acc, gt);
        best_idx = _mm256_castpd_si256(
            _mm256_blendv_pd(_mm256_castsi256_pd(best_idx), _mm256_castsi256_pd(idx), gt));
        idx = _mm256_add_epi64(idx, step);
    }

    ArgMax tail;
    for (; j < c.count; ++j) {
        double acc = c.values[j];
        for (int k = c.dim - 1; k >= 0; --k) {
            double d = x[k] - c.coords[k][j];
            acc = acc - (d * d) / two_theta;
        }
        if (acc > tail.value) {
            tail.value = acc;
            tail.index = j;
        }
    }

    alignas(32) double lane_value[4];
    alignas(32) std::int64_t lane_index[4];
    _mm256_store_pd(lane_value, best);
    _mm256_store_si256(reinterpret_cast<__m256i*>(lane_index), best_idx);
    return merge(lane_value, lane_index, 4, tail);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = lanes[0];
    for (int l = 1; l < 4; ++l) r = lanes[l] > r ? lanes[l] : r;
    for (; i < n; ++i) {
        double d = std::fabs(a[i] - b[i]);
        if (d > r) r = d;
    }
    return r;
}

} // namespace nonlin::simd::avx2
