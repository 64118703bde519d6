#pragma once

#include <cmath>
#include <numbers>

namespace nmp::detail {

// Closed forms of R(t) = (1 + cos(pi t)) / 2 and its upper antiderivatives on [0, 1].
//   Rbar(t)    = (1 - t) / 2 - sin(pi t) / (2 pi)
//   Rbarbar(t) = (1 - t)^2 / 4 - (1 + cos(pi t)) / (2 pi^2)

inline double cosine_level0(double t) {
    if (t > 1.0) return 0.0;
    return 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

inline double cosine_level1(double t) {
    if (t > 1.0) return 0.0;
    return 0.5 * (1.0 - t) - std::sin(std::numbers::pi * t) / (2.0 * std::numbers::pi);
}

inline double cosine_level2(double t) {
    if (t > 1.0) return 0.0;
    const double s = 1.0 - t;
    return 0.25 * s * s
           - (1.0 + std::cos(std::numbers::pi * t)) / (2.0 * std::numbers::pi * std::numbers::pi);
}

}  // namespace nmp::detail
