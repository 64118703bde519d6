#include <atomic>
#include <cstdlib>
#include <string_view>

#include "nmp/error.hpp"
#include "nmp/simd.hpp"

namespace nmp::simd {

namespace {

Backend initial_backend() noexcept {
    const char* env = std::getenv("NMP_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return Backend::Scalar;
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& backend_slot() noexcept {
    static std::atomic<Backend> slot{initial_backend()};
    return slot;
}

}  // namespace

const char* to_string(Backend b) noexcept {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
    }
    return "unknown";
}

bool avx2_available() noexcept {
#if defined(__x86_64__) || defined(_M_X64)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

Backend active_backend() noexcept { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available()) {
        throw DomainError("AVX2 backend requested but not supported by this CPU");
    }
    backend_slot().store(b, std::memory_order_relaxed);
}

#if defined(__x86_64__) || defined(_M_X64)
#define NMP_DISPATCH(fn, ...)                                              \
    (active_backend() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define NMP_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) { return NMP_DISPATCH(dot, a, b); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    NMP_DISPATCH(axpy, alpha, x, y);
}

void xpby(std::span<const double> x, double beta, std::span<double> y) {
    NMP_DISPATCH(xpby, x, beta, y);
}

void multiply(std::span<const double> a, std::span<const double> b, std::span<double> out) {
    NMP_DISPATCH(multiply, a, b, out);
}

void spmv(const CsrView& a, std::span<const double> x, std::span<double> y,
          std::size_t row_begin, std::size_t row_end) {
    NMP_DISPATCH(spmv, a, x, y, row_begin, row_end);
}

void squared_distances(std::span<const double> xs, std::span<const double> ys,
                       std::span<const double> zs, const double q[3], std::span<double> out) {
    NMP_DISPATCH(squared_distances, xs, ys, zs, q, out);
}

void cosine_profile(std::span<const double> t, std::span<double> level0,
                    std::span<double> level1, std::span<double> level2) {
    NMP_DISPATCH(cosine_profile, t, level0, level1, level2);
}

#undef NMP_DISPATCH

}  // namespace nmp::simd
