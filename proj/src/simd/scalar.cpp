#include "nmp/detail/cosine_kernel.hpp"
#include "nmp/simd.hpp"

namespace nmp::simd::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + beta * y[i];
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y,
          std::size_t row_begin, std::size_t row_end) {
    for (std::size_t r = row_begin; r < row_end; ++r) {
        double s = 0.0;
        for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) s += a.val[k] * x[a.col[k]];
        y[r] = s;
    }
}

void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, const double q[3], std::span<double> out) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - q[0];
        const double dy = ys[i] - q[1];
        const double dz = zs[i] - q[2];
        out[i] = dx * dx + dy * dy + dz * dz;
    }
}

void cosine_profile(std::span<const double> t, std::span<double> level0,
                    std::span<double> level1, std::span<double> level2) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!level0.empty()) level0[i] = detail::cosine_level0(t[i]);
        if (!level1.empty()) level1[i] = detail::cosine_level1(t[i]);
        if (!level2.empty()) level2[i] = detail::cosine_level2(t[i]);
    }
}

}  // namespace nmp::simd::scalar
