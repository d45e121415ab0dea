#pragma once

// Data-parallel reductions behind the convolution and doubling scans.
//
// Every kernel has a scalar reference in `nonlin::simd::scalar` and optional
// vector variants; `dispatch` picks one at runtime. The vector variants must
// reproduce the scalar result bit for bit, including the index chosen among
// ties, so callers may switch ISA freely.

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>

namespace nonlin::simd {

enum class Isa { scalar, avx2, neon };

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct ArgMax {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t index = npos;
};

/// Candidate set for `penalized_argmax`: `count` candidates with values and
/// structure-of-arrays coordinates (one pointer per axis).
struct Candidates {
    const double* values = nullptr;
    const double* const* coords = nullptr;
    std::size_t count = 0;
    int dim = 0;
};

/// max_j  values[j] - Σ_k (x[k] - coords[k][j])² / two_theta.
///
/// The penalty is subtracted one axis at a time, from the last axis down to
/// axis 0, each term computed as (d*d)/two_theta. Ties keep the smallest j;
/// -inf candidates never win. Returns index npos when no candidate is finite.
using PenalizedArgmaxFn = ArgMax (*)(const Candidates&, const double* x, double two_theta);

/// max_i |a[i] - b[i]|.
using MaxAbsDiffFn = double (*)(const double* a, const double* b, std::size_t n);

namespace scalar {
ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta);
double max_abs_diff(const double* a, const double* b, std::size_t n);
} // namespace scalar

namespace avx2 {
ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta);
double max_abs_diff(const double* a, const double* b, std::size_t n);
} // namespace avx2

namespace neon {
ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta);
double max_abs_diff(const double* a, const double* b, std::size_t n);
} // namespace neon

/// Whether the variant was compiled in and the running CPU supports it.
bool available(Isa isa);
/// ISA used by the dispatching entry points. Defaults to the widest available
/// one; the NONLIN_SIMD environment variable (scalar|avx2|neon) overrides.
Isa active();
/// Force a specific ISA (tests). Throws if unavailable.
void set_active(Isa isa);
std::string_view name(Isa isa);

ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta);
double max_abs_diff(const double* a, const double* b, std::size_t n);

PenalizedArgmaxFn penalized_argmax_for(Isa isa);
MaxAbsDiffFn max_abs_diff_for(Isa isa);

} // namespace nonlin::simd
