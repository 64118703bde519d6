#pragma once

// Compactly supported kernel profiles R on [0, 1], their upper antiderivatives
// Rbar(r) = int_r^inf R and Rbarbar(r) = int_r^inf Rbar, and the delta-scaled
// family R_delta(x, y) = C_delta * R(|x - y|^2 / (4 delta^2)).

#include <Eigen/Core>

#include <memory>
#include <span>
#include <vector>

namespace nmp {

/// Antiderivative depth: 0 is R, 1 is Rbar, 2 is Rbarbar.
enum class Level : int { R = 0, Bar = 1, BarBar = 2 };

class KernelProfile {
public:
    /// R(r) = (1 + cos(pi r)) / 2 on [0, 1]; all levels in closed form.
    static KernelProfile cosine();

    /// Profile from samples on [0, 1] (radii strictly increasing, first 0, last 1).
    /// Antiderivatives are integrated adaptively and cached on a 4096-point grid.
    static KernelProfile tabulated(std::vector<double> radii, std::vector<double> values);

    bool is_cosine() const noexcept { return table_ == nullptr; }

    /// Throws DomainError for r < 0 (or NaN).
    double eval(Level level, double r) const;

    /// out[i] = level(r[i]); any output span may be empty.
    void eval_all(std::span<const double> r, std::span<double> level0, std::span<double> level1,
                  std::span<double> level2) const;

private:
    struct Table;
    KernelProfile() = default;
    std::shared_ptr<const Table> table_;
};

class KernelFamily {
public:
    KernelFamily(KernelProfile profile, double delta, int intrinsic_dim = 2);

    static KernelFamily cosine(double delta, int intrinsic_dim = 2) {
        return KernelFamily(KernelProfile::cosine(), delta, intrinsic_dim);
    }

    const KernelProfile& profile() const noexcept { return profile_; }
    double delta() const noexcept { return delta_; }
    int intrinsic_dim() const noexcept { return dim_; }

    /// C_delta = (4 pi delta^2)^(-m/2).
    double normalization() const noexcept { return c_delta_; }

    /// Interaction radius 2 delta; scaled kernels vanish beyond it.
    double support_radius() const noexcept { return 2.0 * delta_; }

    double eval_level(Level level, double r) const { return profile_.eval(level, r); }

    double eval_scaled(Level level, const Eigen::Vector3d& x, const Eigen::Vector3d& y) const {
        return from_squared_distance(level, (x - y).squaredNorm());
    }

    double from_squared_distance(Level level, double d2) const {
        return c_delta_ * profile_.eval(level, d2 * inv_4delta2_);
    }

    /// Scaled kernel of every level for a batch of squared distances.
    /// `scratch` must hold sqdist.size() doubles.
    void scaled_batch(std::span<const double> sqdist, std::span<double> scratch,
                      std::span<double> level0, std::span<double> level1,
                      std::span<double> level2) const;

private:
    KernelProfile profile_;
    double delta_;
    int dim_;
    double c_delta_;
    double inv_4delta2_;
};

}  // namespace nmp
