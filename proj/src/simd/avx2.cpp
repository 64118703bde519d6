// Compiled with -mavx2 -mfma; only reached through dispatch when CPUID reports both.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <numbers>

#include "nmp/simd.hpp"

namespace nmp::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Polynomials for sin and cos on [-pi/4, pi/4] (Cephes coefficients).
inline __m256d poly_sin(__m256d z) {
    __m256d p = _mm256_set1_pd(1.58962301576546568060e-10);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-2.50507477628578072866e-8));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.75573136213857245213e-6));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-1.98412698295895385996e-4));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(8.33333333332211858878e-3));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-1.66666666666666307295e-1));
    return p;
}

inline __m256d poly_cos(__m256d z) {
    __m256d p = _mm256_set1_pd(-1.13585365213876817300e-11);
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.08757008419747316778e-9));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-2.75573141792967388112e-7));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(2.48015872888517045348e-5));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(-1.38888888888730564116e-3));
    p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(4.16666666666665929218e-2));
    return p;
}

// Evaluates the three profile levels for four arguments t >= 0.
inline void profile4(__m256d t, __m256d& r0, __m256d& r1, __m256d& r2) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d inside = _mm256_cmp_pd(t, one, _CMP_LE_OQ);
    const __m256d tc = _mm256_min_pd(_mm256_max_pd(t, zero), one);

    // pi t = pi d + k pi / 2 with k in {0, 1, 2}; d = t - k / 2 is exact.
    const __m256d k = _mm256_round_pd(_mm256_add_pd(tc, tc), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    const __m256d d = _mm256_fnmadd_pd(half, k, tc);
    const __m256d pi_hi = _mm256_set1_pd(3.141592653589793116);
    const __m256d pi_lo = _mm256_set1_pd(1.2246467991473532e-16);
    const __m256d y = _mm256_fmadd_pd(d, pi_hi, _mm256_mul_pd(d, pi_lo));
    const __m256d z = _mm256_mul_pd(y, y);

    const __m256d sin_y = _mm256_fmadd_pd(_mm256_mul_pd(y, z), poly_sin(z), y);
    const __m256d cos_y = _mm256_fmadd_pd(_mm256_mul_pd(z, z), poly_cos(z), _mm256_fnmadd_pd(half, z, one));

    const __m256d q1 = _mm256_cmp_pd(k, one, _CMP_EQ_OQ);
    const __m256d q2 = _mm256_cmp_pd(k, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d c = _mm256_blendv_pd(cos_y, _mm256_xor_pd(sin_y, sign), q1);
    c = _mm256_blendv_pd(c, _mm256_xor_pd(cos_y, sign), q2);
    __m256d s = _mm256_blendv_pd(sin_y, cos_y, q1);
    s = _mm256_blendv_pd(s, _mm256_xor_pd(sin_y, sign), q2);

    const __m256d one_plus_c = _mm256_add_pd(one, c);
    const __m256d rem = _mm256_sub_pd(one, tc);
    const double inv_two_pi = 1.0 / (2.0 * std::numbers::pi);
    const double inv_two_pi2 = 1.0 / (2.0 * std::numbers::pi * std::numbers::pi);

    r0 = _mm256_and_pd(_mm256_mul_pd(half, one_plus_c), inside);
    r1 = _mm256_and_pd(_mm256_fnmadd_pd(s, _mm256_set1_pd(inv_two_pi), _mm256_mul_pd(half, rem)), inside);
    r2 = _mm256_and_pd(
        _mm256_fnmadd_pd(one_plus_c, _mm256_set1_pd(inv_two_pi2),
                         _mm256_mul_pd(_mm256_set1_pd(0.25), _mm256_mul_pd(rem, rem))),
        inside);
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i + 4]), _mm256_loadu_pd(&b[i + 4]), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i]), acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(&y[i], _mm256_fmadd_pd(va, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i])));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    const std::size_t n = x.size();
    const __m256d vb = _mm256_set1_pd(beta);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(&y[i], _mm256_fmadd_pd(vb, _mm256_loadu_pd(&y[i]), _mm256_loadu_pd(&x[i])));
    }
    for (; i < n; ++i) y[i] = x[i] + beta * y[i];
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(&out[i], _mm256_mul_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i])));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y,
          std::size_t row_begin, std::size_t row_end) {
    const double* xp = x.data();
    for (std::size_t r = row_begin; r < row_end; ++r) {
        auto k = a.row_ptr[r];
        const auto end = a.row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= end; k += 4) {
            const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(&a.col[k]));
            const __m256d xv = _mm256_i32gather_pd(xp, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(&a.val[k]), xv, acc);
        }
        double s = hsum(acc);
        for (; k < end; ++k) s += a.val[k] * xp[a.col[k]];
        y[r] = s;
    }
}

void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, const double q[3], std::span<double> out) {
    const std::size_t n = xs.size();
    const __m256d qx = _mm256_set1_pd(q[0]);
    const __m256d qy = _mm256_set1_pd(q[1]);
    const __m256d qz = _mm256_set1_pd(q[2]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(&xs[i]), qx);
        const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(&ys[i]), qy);
        const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(&zs[i]), qz);
        // Same association as the scalar kernel: (dx*dx + dy*dy) + dz*dz, no FMA.
        const __m256d s = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
                                        _mm256_mul_pd(dz, dz));
        _mm256_storeu_pd(&out[i], s);
    }
    for (; i < n; ++i) {
        const double dx = xs[i] - q[0];
        const double dy = ys[i] - q[1];
        const double dz = zs[i] - q[2];
        out[i] = dx * dx + dy * dy + dz * dz;
    }
}

void cosine_profile(std::span<const double> t, std::span<double> level0,
                    std::span<double> level1, std::span<double> level2) {
    const std::size_t n = t.size();
    auto store = [&](std::size_t i, std::size_t count, __m256d r0, __m256d r1, __m256d r2) {
        alignas(32) std::array<double, 4> b0{}, b1{}, b2{};
        _mm256_store_pd(b0.data(), r0);
        _mm256_store_pd(b1.data(), r1);
        _mm256_store_pd(b2.data(), r2);
        for (std::size_t j = 0; j < count; ++j) {
            if (!level0.empty()) level0[i + j] = b0[j];
            if (!level1.empty()) level1[i + j] = b1[j];
            if (!level2.empty()) level2[i + j] = b2[j];
        }
    };
    std::size_t i = 0;
    __m256d r0, r1, r2;
    for (; i + 4 <= n; i += 4) {
        profile4(_mm256_loadu_pd(&t[i]), r0, r1, r2);
        store(i, 4, r0, r1, r2);
    }
    if (i < n) {
        // Pad the tail so every element goes through the same polynomial path.
        alignas(32) std::array<double, 4> pad{2.0, 2.0, 2.0, 2.0};
        std::copy(t.begin() + static_cast<std::ptrdiff_t>(i), t.end(), pad.begin());
        profile4(_mm256_load_pd(pad.data()), r0, r1, r2);
        store(i, n - i, r0, r1, r2);
    }
}

}  // namespace nmp::simd::avx2
