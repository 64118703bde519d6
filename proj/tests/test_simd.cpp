#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "nmp/simd.hpp"

using namespace nmp;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

}  // namespace

#if defined(__x86_64__) || defined(_M_X64)

TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!simd::avx2_available()) {
        MESSAGE("AVX2 not available; skipping");
        return;
    }
    std::mt19937_64 rng(5);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 9u, 31u, 64u, 1001u}) {
        CAPTURE(n);
        const auto a = random_vector(n, rng), b = random_vector(n, rng);

        const double ds = simd::scalar::dot(a, b), dv = simd::avx2::dot(a, b);
        double scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale += std::abs(a[i] * b[i]);
        CHECK(std::abs(ds - dv) <= 1e-15 * std::max(scale, 1.0) * 4);

        auto ys = b, yv = b;
        simd::scalar::axpy(0.7, a, ys);
        simd::avx2::axpy(0.7, a, yv);
        for (std::size_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-15));

        ys = b, yv = b;
        simd::scalar::xpby(a, -0.3, ys);
        simd::avx2::xpby(a, -0.3, yv);
        for (std::size_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(yv[i]).epsilon(1e-15));

        std::vector<double> ms(n), mv(n);
        simd::scalar::multiply(a, b, ms);
        simd::avx2::multiply(a, b, mv);
        CHECK(ms == mv);

        const auto xs = random_vector(n, rng), zs = random_vector(n, rng);
        const double q[3] = {0.1, -0.2, 0.3};
        std::vector<double> ss(n), sv(n);
        simd::scalar::squared_distances(xs, a, zs, q, ss);
        simd::avx2::squared_distances(xs, a, zs, q, sv);
        CHECK(ss == sv);

        const auto t = random_vector(n, rng, 0.0, 1.3);
        std::vector<double> s0(n), s1(n), s2(n), v0(n), v1(n), v2(n);
        simd::scalar::cosine_profile(t, s0, s1, s2);
        simd::avx2::cosine_profile(t, v0, v1, v2);
        for (std::size_t i = 0; i < n; ++i) {
            CAPTURE(t[i]);
            CHECK(std::abs(s0[i] - v0[i]) <= 4e-16);
            CHECK(std::abs(s1[i] - v1[i]) <= 4e-16);
            CHECK(std::abs(s2[i] - v2[i]) <= 4e-16);
        }
    }
}

TEST_CASE("avx2 cosine profile at the support edge and exact nodes") {
    if (!simd::avx2_available()) return;
    const std::vector<double> t = {0.0, 0.25, 0.5, 0.75, 1.0, 1.0 + 1e-16, 2.0};
    std::vector<double> s0(t.size()), s1(t.size()), s2(t.size()), v0(t.size()), v1(t.size()), v2(t.size());
    simd::scalar::cosine_profile(t, s0, s1, s2);
    simd::avx2::cosine_profile(t, v0, v1, v2);
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(std::abs(s0[i] - v0[i]) <= 4e-16);
        CHECK(std::abs(s1[i] - v1[i]) <= 4e-16);
        CHECK(std::abs(s2[i] - v2[i]) <= 4e-16);
    }
    CHECK(v0.back() == 0.0);
    CHECK(v2.back() == 0.0);
    std::vector<double> empty;
    CHECK_NOTHROW(simd::avx2::cosine_profile(t, v0, empty, empty));
}

TEST_CASE("avx2 spmv agrees with the scalar reference") {
    if (!simd::avx2_available()) return;
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> len(0, 23), col(0, 49);
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> cols;
    std::vector<double> vals;
    for (int r = 0; r < 40; ++r) {
        const int k = len(rng);
        for (int j = 0; j < k; ++j) {
            cols.push_back(col(rng));
            vals.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
        }
        row_ptr.push_back(static_cast<std::int64_t>(cols.size()));
    }
    const simd::CsrView a{row_ptr, cols, vals};
    const auto x = random_vector(50, rng);
    std::vector<double> ys(40), yv(40);
    simd::scalar::spmv(a, x, ys, 0, 40);
    simd::avx2::spmv(a, x, yv, 0, 40);
    for (std::size_t r = 0; r < 40; ++r) CHECK(ys[r] == doctest::Approx(yv[r]).epsilon(1e-14));
    std::vector<double> part(40, -7.0);
    simd::avx2::spmv(a, x, part, 10, 20);
    CHECK(part[9] == -7.0);
    CHECK(part[20] == -7.0);
    CHECK(part[15] == doctest::Approx(ys[15]).epsilon(1e-14));
}

#endif

TEST_CASE("backend selection") {
    const simd::Backend original = simd::active_backend();
    simd::set_backend(simd::Backend::Scalar);
    CHECK(simd::active_backend() == simd::Backend::Scalar);
    const std::vector<double> a = {1, 2, 3}, b = {4, 5, 6};
    CHECK(simd::dot(a, b) == 32.0);
    if (simd::avx2_available()) {
        simd::set_backend(simd::Backend::Avx2);
        CHECK(simd::active_backend() == simd::Backend::Avx2);
        CHECK(simd::dot(a, b) == 32.0);
    }
    simd::set_backend(original);
    CHECK(std::string(simd::to_string(simd::Backend::Scalar)) == "scalar");
}
