#include "nmp/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nmp/error.hpp"
#include "nmp/simd.hpp"

namespace nmp {

namespace {
constexpr std::int64_t kMaxCells = std::int64_t{1} << 23;
}

SpatialGrid::SpatialGrid(std::span<const Eigen::Vector3d> points, double cell_size) {
    if (!(cell_size > 0.0)) throw DomainError("spatial grid cell size must be positive");
    cell_ = cell_size;
    if (points.empty()) {
        cell_start_.assign(2, 0);
        return;
    }
    Eigen::Vector3d lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    origin_ = lo;
    auto dims_for = [&](double c) {
        std::int64_t total = 1;
        for (int a = 0; a < 3; ++a) {
            dims_[a] = static_cast<std::int64_t>(std::floor((hi[a] - lo[a]) / c)) + 1;
            total *= dims_[a];
        }
        return total;
    };
    while (dims_for(cell_) > kMaxCells) cell_ *= 2.0;

    const std::int64_t ncells = dims_[0] * dims_[1] * dims_[2];
    std::vector<std::int64_t> cell_of(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        cell_of[i] = clamp_cell(p.x(), 0) + dims_[0] * (clamp_cell(p.y(), 1) + dims_[1] * clamp_cell(p.z(), 2));
    }
    cell_start_.assign(static_cast<std::size_t>(ncells) + 1, 0);
    for (auto c : cell_of) ++cell_start_[static_cast<std::size_t>(c) + 1];
    std::partial_sum(cell_start_.begin(), cell_start_.end(), cell_start_.begin());

    std::vector<std::int64_t> fill(cell_start_.begin(), cell_start_.end() - 1);
    index_.resize(points.size());
    xs_.resize(points.size());
    ys_.resize(points.size());
    zs_.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto slot = static_cast<std::size_t>(fill[static_cast<std::size_t>(cell_of[i])]++);
        index_[slot] = static_cast<std::int32_t>(i);
        xs_[slot] = points[i].x();
        ys_[slot] = points[i].y();
        zs_[slot] = points[i].z();
    }
}

std::int64_t SpatialGrid::clamp_cell(double coord, int axis) const {
    const auto c = static_cast<std::int64_t>(std::floor((coord - origin_[axis]) / cell_));
    return std::clamp<std::int64_t>(c, 0, dims_[axis] - 1);
}

void SpatialGrid::query(const Eigen::Vector3d& q, double radius, std::vector<std::int32_t>& indices,
                        std::vector<double>& sqdist) const {
    if (index_.empty()) return;
    const double r2 = radius * radius;
    std::int64_t lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        const double fl = std::floor((q[a] - radius - origin_[a]) / cell_);
        const double fh = std::floor((q[a] + radius - origin_[a]) / cell_);
        if (fh < 0.0 || fl > static_cast<double>(dims_[a] - 1)) return;
        lo[a] = std::max<std::int64_t>(0, static_cast<std::int64_t>(fl));
        hi[a] = std::min<std::int64_t>(dims_[a] - 1, static_cast<std::int64_t>(fh));
    }
    const double qa[3] = {q.x(), q.y(), q.z()};
    std::vector<double> buffer;
    for (std::int64_t z = lo[2]; z <= hi[2]; ++z) {
        for (std::int64_t y = lo[1]; y <= hi[1]; ++y) {
            const std::int64_t row = dims_[0] * (y + dims_[1] * z);
            const auto begin = static_cast<std::size_t>(cell_start_[static_cast<std::size_t>(row + lo[0])]);
            const auto end = static_cast<std::size_t>(cell_start_[static_cast<std::size_t>(row + hi[0] + 1)]);
            if (begin == end) continue;
            const std::size_t count = end - begin;
            buffer.resize(count);
            simd::squared_distances(std::span(xs_).subspan(begin, count), std::span(ys_).subspan(begin, count),
                                    std::span(zs_).subspan(begin, count), qa, buffer);
            for (std::size_t k = 0; k < count; ++k) {
                if (buffer[k] < r2) {
                    indices.push_back(index_[begin + k]);
                    sqdist.push_back(buffer[k]);
                }
            }
        }
    }
}

std::vector<std::int32_t> SpatialGrid::nearest(const Eigen::Vector3d& q, std::size_t k) const {
    k = std::min(k, index_.size());
    std::vector<std::int32_t> idx;
    std::vector<double> d2;
    double radius = cell_;
    for (;;) {
        idx.clear();
        d2.clear();
        query(q, radius, idx, d2);
        if (idx.size() >= k || idx.size() == index_.size()) break;
        radius *= 2.0;
    }
    std::vector<std::size_t> order(idx.size());
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](std::size_t a, std::size_t b) {
        return d2[a] < d2[b] || (d2[a] == d2[b] && idx[a] < idx[b]);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), less);
    std::vector<std::int32_t> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = idx[order[i]];
    return out;
}

}  // namespace nmp
