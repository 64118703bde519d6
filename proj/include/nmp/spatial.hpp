#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace nmp {

/// Uniform bucket grid over a fixed point set. Points are stored cell-major in
/// structure-of-arrays form so that a query scans contiguous runs.
class SpatialGrid {
public:
    SpatialGrid() = default;
    SpatialGrid(std::span<const Eigen::Vector3d> points, double cell_size);

    std::size_t size() const noexcept { return index_.size(); }
    double cell_size() const noexcept { return cell_; }

    /// Appends every point with |p - q| < radius. Order follows the cell layout,
    /// which is deterministic for a given point set and cell size.
    void query(const Eigen::Vector3d& q, double radius, std::vector<std::int32_t>& indices,
               std::vector<double>& sqdist) const;

    /// Indices of the k nearest points (ties broken by index), nearest first.
    std::vector<std::int32_t> nearest(const Eigen::Vector3d& q, std::size_t k) const;

private:
    double cell_ = 1.0;
    Eigen::Vector3d origin_ = Eigen::Vector3d::Zero();
    std::int64_t dims_[3] = {1, 1, 1};
    std::vector<std::int64_t> cell_start_;
    std::vector<double> xs_, ys_, zs_;
    std::vector<std::int32_t> index_;

    std::int64_t clamp_cell(double coord, int axis) const;
};

}  // namespace nmp
