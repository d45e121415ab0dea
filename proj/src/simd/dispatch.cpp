#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "nonlin/simd/kernels.hpp"

namespace nonlin::simd {

namespace {

#if defined(__aarch64__) || defined(__ARM_NEON)
constexpr bool kNeonCompiled = true;
#else
constexpr bool kNeonCompiled = false;
#endif

#if defined(NONLIN_HAVE_AVX2_TU)
constexpr bool kAvx2Compiled = true;
#else
constexpr bool kAvx2Compiled = false;
#endif

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("NONLIN_SIMD")) {
        std::string want(env);
        if (want == "scalar") return Isa::scalar;
        if (want == "avx2" && available(Isa::avx2)) return Isa::avx2;
        if (want == "neon" && available(Isa::neon)) return Isa::neon;
    }
    if (available(Isa::avx2)) return Isa::avx2;
    if (available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
}

std::atomic<Isa>& active_slot() {
    static std::atomic<Isa> slot{detect()};
    return slot;
}

} // namespace

bool available(Isa isa) {
    switch (isa) {
    case Isa::scalar: return true;
    case Isa::avx2: return kAvx2Compiled && cpu_has_avx2();
    case Isa::neon: return kNeonCompiled;
    }
    return false;
}

Isa active() { return active_slot().load(std::memory_order_relaxed); }

void set_active(Isa isa) {
    if (!available(isa)) throw std::invalid_argument("SIMD variant not available: " + std::string(name(isa)));
    active_slot().store(isa, std::memory_order_relaxed);
}

std::string_view name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
    }
    return "unknown";
}

PenalizedArgmaxFn penalized_argmax_for(Isa isa) {
    switch (isa) {
#if defined(NONLIN_HAVE_AVX2_TU)
    case Isa::avx2: return &avx2::penalized_argmax;
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
    case Isa::neon: return &neon::penalized_argmax;
#endif
    default: return &scalar::penalized_argmax;
    }
}

MaxAbsDiffFn max_abs_diff_for(Isa isa) {
    switch (isa) {
#if defined(NONLIN_HAVE_AVX2_TU)
    case Isa::avx2: return &avx2::max_abs_diff;
#endif
#if defined(__aarch64__) || defined(__ARM_NEON)
    case Isa::neon: return &neon::max_abs_diff;
#endif
    default: return &scalar::max_abs_diff;
    }
}

ArgMax penalized_argmax(const Candidates& c, const double* x, double two_theta) {
    return penalized_argmax_for(active())(c, x, two_theta);
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    return max_abs_diff_for(active())(a, b, n);
}

} // namespace nonlin::simd
