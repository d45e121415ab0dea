#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <vector>

#include "nonlin/simd/kernels.hpp"

using namespace nonlin;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

struct Cloud {
    std::vector<double> values;
    std::vector<std::vector<double>> axes;
    std::vector<const double*> ptrs;
    simd::Candidates cand() {
        ptrs.clear();
        for (auto& a : axes) ptrs.push_back(a.data());
        return {values.data(), ptrs.data(), values.size(), static_cast<int>(axes.size())};
    }
};

Cloud make_cloud(std::mt19937_64& rng, std::size_t count, int dim, bool ties, bool infs) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Cloud c;
    c.values.resize(count);
    c.axes.assign(dim, std::vector<double>(count));
    for (std::size_t j = 0; j < count; ++j) {
        c.values[j] = ties ? std::round(2 * U(rng)) : U(rng);
        if (infs && U(rng) < -0.3) c.values[j] = -kInf;
        for (int k = 0; k < dim; ++k) c.axes[k][j] = ties ? 0.25 * std::round(4 * U(rng)) : U(rng);
    }
    return c;
}

std::vector<simd::Isa> vector_isas() {
    std::vector<simd::Isa> out;
    for (auto isa : {simd::Isa::avx2, simd::Isa::neon})
        if (simd::available(isa)) out.push_back(isa);
    return out;
}

} // namespace

TEST_CASE("scalar kernel examples") {
    Cloud c;
    c.values = {0.0, 0.5, 1.0};
    c.axes = {{0.0, 0.5, 1.0}};
    double x = 0.0;
    auto r = simd::scalar::penalized_argmax(c.cand(), &x, 2.0);
    CHECK(r.value == 0.5);
    CHECK(r.index == 2);

    c.values = {1.0, 1.0, 1.0};
    c.axes = {{-0.5, 0.5, 0.0}};
    r = simd::scalar::penalized_argmax(c.cand(), &x, 2.0);
    CHECK(r.index == 2);
    c.axes = {{0.5, -0.5, 1.0}};
    r = simd::scalar::penalized_argmax(c.cand(), &x, 2.0);
    CHECK(r.index == 0); // tie keeps the smallest index

    c.values = {-kInf, -kInf};
    c.axes = {{0.0, 1.0}};
    r = simd::scalar::penalized_argmax(c.cand(), &x, 2.0);
    CHECK(r.index == simd::npos);
    CHECK(r.value == -kInf);

    std::vector<double> a{1.0, -2.0, 3.0}, b{1.5, 2.0, 3.0};
    CHECK(simd::scalar::max_abs_diff(a.data(), b.data(), 3) == 4.0);
    CHECK(simd::scalar::max_abs_diff(a.data(), b.data(), 0) == 0.0);
}

TEST_CASE("vector kernels match the scalar reference bit for bit") {
    const auto isas = vector_isas();
    if (isas.empty()) {
        MESSAGE("no vector ISA available; equivalence not exercised");
        return;
    }
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (auto isa : isas) {
        auto vec = simd::penalized_argmax_for(isa);
        auto vdiff = simd::max_abs_diff_for(isa);
        for (int t = 0; t < 600; ++t) {
            const std::size_t count = static_cast<std::size_t>(t % 37) + (t % 5 == 0 ? 200 : 0);
            const int dim = 1 + t % 3;
            auto cloud = make_cloud(rng, count, dim, t % 3 == 0, t % 4 == 1);
            std::vector<double> x(dim);
            for (double& c : x) c = t % 3 == 0 ? 0.25 * std::round(4 * U(rng)) : U(rng);
            const double two_theta = 0.001 + std::fabs(U(rng));
            auto s = simd::scalar::penalized_argmax(cloud.cand(), x.data(), two_theta);
            auto v = vec(cloud.cand(), x.data(), two_theta);
            CHECK(s.index == v.index);
            CHECK(same_bits(s.value, v.value));

            std::vector<double> a(count), b(count);
            for (std::size_t i = 0; i < count; ++i) {
                a[i] = U(rng);
                b[i] = t % 2 ? a[i] : U(rng);
            }
            CHECK(same_bits(simd::scalar::max_abs_diff(a.data(), b.data(), count), vdiff(a.data(), b.data(), count)));
        }
    }
}

TEST_CASE("runtime dispatch") {
    CHECK(simd::available(simd::Isa::scalar));
    const auto before = simd::active();
    CHECK(simd::available(before));
    simd::set_active(simd::Isa::scalar);
    CHECK(simd::active() == simd::Isa::scalar);
    CHECK(simd::name(simd::Isa::scalar) == "scalar");
    CHECK(simd::penalized_argmax_for(simd::Isa::scalar) == &simd::scalar::penalized_argmax);
    for (auto isa : {simd::Isa::avx2, simd::Isa::neon})
        if (!simd::available(isa)) CHECK_THROWS(simd::set_active(isa));
    simd::set_active(before);
    CHECK(simd::active() == before);
}
