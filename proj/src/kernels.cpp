#include "nmp/kernels.hpp"

#include <math.h>  // pchip.hpp calls unqualified isnan

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>
#include <string>

#include "nmp/detail/cosine_kernel.hpp"
#include "nmp/error.hpp"
#include "nmp/simd.hpp"

namespace nmp {

namespace {

constexpr std::size_t kCacheSize = 4096;
constexpr double kQuadratureTol = 1e-12;

using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
using Hermite = boost::math::interpolators::cubic_hermite<std::vector<double>>;

// A cache cell spans few Pchip pieces, so a shallow recursion is exact to rounding;
// a deep one only chases the relative tolerance where the integrand vanishes.
double integrate(const auto& f, double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 4u, kQuadratureTol);
}

}  // namespace

struct KernelProfile::Table {
    Pchip level0;
    Hermite level1;
    Hermite level2;

    Table(Pchip p, Hermite h1, Hermite h2)
        : level0(std::move(p)), level1(std::move(h1)), level2(std::move(h2)) {}
};

KernelProfile KernelProfile::cosine() { return KernelProfile(); }

KernelProfile KernelProfile::tabulated(std::vector<double> radii, std::vector<double> values) {
    if (radii.size() != values.size() || radii.size() < 4) {
        throw ConfigError("tabulated kernel needs at least 4 (radius, value) samples of equal length",
                          "kernel");
    }
    if (radii.front() != 0.0 || radii.back() != 1.0) {
        throw ConfigError("tabulated kernel radii must start at 0 and end at 1", "kernel");
    }
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (i > 0 && !(radii[i] > radii[i - 1])) {
            throw ConfigError("tabulated kernel radii must be strictly increasing", "kernel");
        }
        const bool last = i + 1 == radii.size();
        if (!(values[i] >= 0.0) || (!last && values[i] <= 0.0)) {
            throw ConfigError("tabulated kernel must be positive on [0, 1)", "kernel");
        }
    }

    Pchip level0(std::move(radii), std::move(values));
    auto r0 = [&level0](double r) { return r >= 1.0 ? 0.0 : std::max(level0(r), 0.0); };

    std::vector<double> grid(kCacheSize);
    for (std::size_t k = 0; k < kCacheSize; ++k) {
        grid[k] = static_cast<double>(k) / static_cast<double>(kCacheSize - 1);
    }

    // Upper antiderivatives accumulated from r = 1 downwards, cell by cell.
    std::vector<double> bar(kCacheSize, 0.0), dbar(kCacheSize, 0.0);
    for (std::size_t k = kCacheSize - 1; k-- > 0;) {
        bar[k] = bar[k + 1] + integrate(r0, grid[k], grid[k + 1]);
    }
    for (std::size_t k = 0; k < kCacheSize; ++k) dbar[k] = -r0(grid[k]);
    Hermite level1{std::vector<double>(grid), std::vector<double>(bar), std::vector<double>(dbar)};

    std::vector<double> barbar(kCacheSize, 0.0), dbarbar(kCacheSize, 0.0);
    auto r1 = [&level1](double r) { return r >= 1.0 ? 0.0 : level1(r); };
    for (std::size_t k = kCacheSize - 1; k-- > 0;) {
        barbar[k] = barbar[k + 1] + integrate(r1, grid[k], grid[k + 1]);
    }
    for (std::size_t k = 0; k < kCacheSize; ++k) dbarbar[k] = -bar[k];
    Hermite level2{std::move(grid), std::move(barbar), std::move(dbarbar)};

    KernelProfile p;
    p.table_ = std::make_shared<const Table>(std::move(level0), std::move(level1), std::move(level2));
    return p;
}

double KernelProfile::eval(Level level, double r) const {
    if (!(r >= 0.0)) throw DomainError("kernel argument must be nonnegative, got " + std::to_string(r));
    if (r > 1.0) return 0.0;
    if (table_ == nullptr) {
        switch (level) {
            case Level::R: return detail::cosine_level0(r);
            case Level::Bar: return detail::cosine_level1(r);
            case Level::BarBar: return detail::cosine_level2(r);
        }
    }
    switch (level) {
        case Level::R: return std::max(table_->level0(r), 0.0);
        case Level::Bar: return table_->level1(r);
        case Level::BarBar: return table_->level2(r);
    }
    throw DomainError("unknown kernel level");
}

void KernelProfile::eval_all(std::span<const double> r, std::span<double> level0,
                             std::span<double> level1, std::span<double> level2) const {
    if (table_ == nullptr) {
        simd::cosine_profile(r, level0, level1, level2);
        return;
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!level0.empty()) level0[i] = eval(Level::R, r[i]);
        if (!level1.empty()) level1[i] = eval(Level::Bar, r[i]);
        if (!level2.empty()) level2[i] = eval(Level::BarBar, r[i]);
    }
}

KernelFamily::KernelFamily(KernelProfile profile, double delta, int intrinsic_dim)
    : profile_(std::move(profile)), delta_(delta), dim_(intrinsic_dim) {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ConfigError("kernel scale delta must be positive and finite", "delta");
    }
    if (intrinsic_dim < 1) throw ConfigError("intrinsic dimension must be at least 1", "intrinsic_dim");
    c_delta_ = std::pow(4.0 * std::numbers::pi * delta * delta, -0.5 * intrinsic_dim);
    inv_4delta2_ = 1.0 / (4.0 * delta * delta);
}

void KernelFamily::scaled_batch(std::span<const double> sqdist, std::span<double> scratch,
                                std::span<double> level0, std::span<double> level1,
                                std::span<double> level2) const {
    const std::size_t n = sqdist.size();
    for (std::size_t i = 0; i < n; ++i) scratch[i] = sqdist[i] * inv_4delta2_;
    profile_.eval_all(scratch.first(n), level0, level1, level2);
    for (std::span<double> out : {level0, level1, level2}) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c_delta_;
    }
}

}  // namespace nmp
