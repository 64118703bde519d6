#pragma once

// Data-parallel inner loops used by assembly, quadrature and the CG solver.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is picked once at startup from CPUID and can be
// overridden with NMP_SIMD=scalar|avx2 or set_backend().

#include <cstddef>
#include <cstdint>
#include <span>

namespace nmp::simd {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend b) noexcept;

bool avx2_available() noexcept;

Backend active_backend() noexcept;

/// Throws DomainError when the requested backend is not supported by this CPU.
void set_backend(Backend b);

/// Read-only view of a compressed-row matrix.
struct CsrView {
    std::span<const std::int64_t> row_ptr;
    std::span<const std::int32_t> col;
    std::span<const double> val;
};

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);

/// out = a * b elementwise
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);

/// y[r] = sum_k A[r, k] x[k] for r in [row_begin, row_end).
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y,
          std::size_t row_begin, std::size_t row_end);

/// out[i] = |(xs[i], ys[i], zs[i]) - q|^2
void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, const double q[3], std::span<double> out);

/// Cosine profile R(t) = (1 + cos(pi t)) / 2 on [0, 1] and its upper
/// antiderivatives, all zero for t > 1. Any output span may be empty to skip it.
void cosine_profile(std::span<const double> t, std::span<double> level0,
                    std::span<double> level1, std::span<double> level2);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y,
          std::size_t row_begin, std::size_t row_end);
void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, const double q[3], std::span<double> out);
void cosine_profile(std::span<const double> t, std::span<double> level0,
                    std::span<double> level1, std::span<double> level2);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void xpby(std::span<const double> x, double beta, std::span<double> y);
void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out);
void spmv(const CsrView& a, std::span<const double> x, std::span<double> y,
          std::size_t row_begin, std::size_t row_end);
void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, const double q[3], std::span<double> out);
void cosine_profile(std::span<const double> t, std::span<double> level0,
                    std::span<double> level1, std::span<double> level2);
}  // namespace avx2
#endif

}  // namespace nmp::simd
