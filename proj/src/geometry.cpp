#include "nmp/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "nmp/error.hpp"
#include "nmp/spatial.hpp"

namespace nmp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
    a = std::fmod(a, kTwoPi);
    return a < 0.0 ? a + kTwoPi : a;
}

}  // namespace

ParametricManifold::ParametricManifold(std::string name, ChartFn chart, InverseFn inverse,
                                       AreaSamplerFn sampler, double v_min, double v_max,
                                       double area, double boundary_length)
    : name_(std::move(name)),
      chart_(std::move(chart)),
      inverse_(std::move(inverse)),
      sampler_(std::move(sampler)),
      v_min_(v_min),
      v_max_(v_max),
      area_(area),
      boundary_length_(boundary_length) {
    if (!(v_max > v_min)) throw GeometryError("chart parameter range is empty");
}

ParametricManifold ParametricManifold::hemisphere() {
    auto chart = [](double u, double v) {
        const double su = std::sin(u), cu = std::cos(u), sv = std::sin(v), cv = std::cos(v);
        ChartJet j;
        j.point = {sv * cu, sv * su, cv};
        j.du = {-sv * su, sv * cu, 0.0};
        j.dv = {cv * cu, cv * su, -sv};
        j.duu = {-sv * cu, -sv * su, 0.0};
        j.duv = {-cv * su, cv * cu, 0.0};
        j.dvv = {-sv * cu, -sv * su, -cv};
        return j;
    };
    auto inverse = [](const Vec3& x) {
        return Eigen::Vector2d(wrap_angle(std::atan2(x.y(), x.x())),
                               std::acos(std::clamp(x.z() / x.norm(), -1.0, 1.0)));
    };
    // z = 1 - s is uniform on (0, 1]: equal-area law on the sphere.
    auto sampler = [](double s, double t) { return Eigen::Vector2d(kTwoPi * t, std::acos(1.0 - s)); };
    return ParametricManifold("hemisphere", chart, inverse, sampler, 0.0, 0.5 * std::numbers::pi,
                              kTwoPi, kTwoPi);
}

ParametricManifold ParametricManifold::disk(double radius) {
    if (!(radius > 0.0)) throw GeometryError("disk radius must be positive");
    auto chart = [](double u, double v) {
        const double su = std::sin(u), cu = std::cos(u);
        ChartJet j;
        j.point = {v * cu, v * su, 0.0};
        j.du = {-v * su, v * cu, 0.0};
        j.dv = {cu, su, 0.0};
        j.duu = {-v * cu, -v * su, 0.0};
        j.duv = {-su, cu, 0.0};
        j.dvv = Vec3::Zero();
        return j;
    };
    auto inverse = [](const Vec3& x) {
        return Eigen::Vector2d(wrap_angle(std::atan2(x.y(), x.x())), std::hypot(x.x(), x.y()));
    };
    auto sampler = [radius](double s, double t) {
        return Eigen::Vector2d(kTwoPi * t, radius * std::sqrt(s));
    };
    return ParametricManifold("disk", chart, inverse, sampler, 0.0, radius,
                              std::numbers::pi * radius * radius, kTwoPi * radius);
}

Vec3 ParametricManifold::surface_normal(double u, double v) const {
    const ChartJet j = jet(u, v);
    return j.du.cross(j.dv).normalized();
}

double ParametricManifold::area_element(double u, double v) const {
    const ChartJet j = jet(u, v);
    return j.du.cross(j.dv).norm();
}

Eigen::Matrix2d ParametricManifold::metric(double u, double v) const {
    const ChartJet j = jet(u, v);
    Eigen::Matrix2d g;
    g << j.du.dot(j.du), j.du.dot(j.dv), j.dv.dot(j.du), j.dv.dot(j.dv);
    return g;
}

double ParametricManifold::kappa_n(double omega) const {
    const ChartJet j = jet(omega, v_max_);
    const double h = j.du.squaredNorm();
    if (h <= 1e-14) throw GeometryError("degenerate boundary metric at parameter " + std::to_string(omega));
    const Vec3 t = j.du / std::sqrt(h);
    const Vec3 n = (j.dv - j.dv.dot(t) * t).normalized();
    return j.duu.dot(n) / h;
}

BoundaryPoint ParametricManifold::boundary_point(double omega) const {
    const ChartJet j = jet(omega, v_max_);
    BoundaryPoint b;
    b.param = omega;
    b.position = j.point;
    b.length_element = j.du.norm();
    if (b.length_element * b.length_element <= 1e-14) {
        throw GeometryError("degenerate boundary metric at parameter " + std::to_string(omega));
    }
    b.tangent = j.du / b.length_element;
    b.conormal = (j.dv - j.dv.dot(b.tangent) * b.tangent).normalized();
    b.surface_normal = j.du.cross(j.dv).normalized();
    b.kappa_n = kappa_n(omega);
    return b;
}

bool ParametricManifold::contains(const Vec3& x, double tol) const {
    const Eigen::Vector2d p = parameters(x);
    if (p.y() < v_min_ - tol || p.y() > v_max_ + tol) return false;
    return (point(p.x(), p.y()) - x).norm() <= tol;
}

bool ParametricManifold::on_boundary(const Vec3& x, double tol) const {
    return contains(x, tol) && std::abs(parameters(x).y() - v_max_) <= tol;
}

double laplace_beltrami(const ParametricManifold& m, const ScalarField& f, double u, double v, double h) {
    auto value = [&](double a, double b) { return f(m.point(a, b)); };
    // Flux sqrt(det g) g^{-1} grad(f o Phi) at a parameter point.
    auto flux = [&](double a, double b) {
        const Eigen::Vector2d grad((value(a + h, b) - value(a - h, b)) / (2.0 * h),
                                   (value(a, b + h) - value(a, b - h)) / (2.0 * h));
        const Eigen::Matrix2d g = m.metric(a, b);
        return Eigen::Vector2d(std::sqrt(g.determinant()) * g.inverse() * grad);
    };
    const double div = (flux(u + h, v).x() - flux(u - h, v).x()) / (2.0 * h)
                       + (flux(u, v + h).y() - flux(u, v - h).y()) / (2.0 * h);
    return div / std::sqrt(m.metric(u, v).determinant());
}

double boundary_laplacian(const ParametricManifold& m, const ScalarField& f, double omega, double h) {
    auto speed = [&](double w) { return m.jet(w, m.v_max()).du.norm(); };
    const double eta = h / speed(omega);
    const double f0 = f(m.boundary(omega));
    const double plus = (f(m.boundary(omega + eta)) - f0) / (eta * speed(omega + 0.5 * eta));
    const double minus = (f0 - f(m.boundary(omega - eta))) / (eta * speed(omega - 0.5 * eta));
    return (plus - minus) / (eta * speed(omega));
}

// ---------------------------------------------------------------------------

const char* to_string(SamplingMode m) noexcept {
    return m == SamplingMode::Random ? "random" : "lattice";
}

const char* to_string(WeightMode m) noexcept {
    switch (m) {
        case WeightMode::Auto: return "auto";
        case WeightMode::Uniform: return "uniform";
        case WeightMode::Voronoi: return "voronoi";
    }
    return "auto";
}

SamplingMode parse_sampling_mode(const std::string& s) {
    if (s == "random") return SamplingMode::Random;
    if (s == "lattice") return SamplingMode::Lattice;
    throw ConfigError("unknown sampling mode '" + s + "' (expected random or lattice)", "mode");
}

WeightMode parse_weight_mode(const std::string& s) {
    if (s == "auto") return WeightMode::Auto;
    if (s == "uniform") return WeightMode::Uniform;
    if (s == "voronoi") return WeightMode::Voronoi;
    throw ConfigError("unknown weight mode '" + s + "' (expected auto, uniform or voronoi)", "weight_mode");
}

double PointCloud::total_area() const {
    double s = 0.0;
    for (const auto& p : interior) s += p.area;
    return s;
}

double PointCloud::total_length() const {
    double s = 0.0;
    for (const auto& q : boundary) s += q.length;
    return s;
}

std::vector<Vec3> PointCloud::interior_positions() const {
    std::vector<Vec3> out;
    out.reserve(interior.size());
    for (const auto& p : interior) out.push_back(p.position);
    return out;
}

std::vector<Vec3> PointCloud::boundary_positions() const {
    std::vector<Vec3> out;
    out.reserve(boundary.size());
    for (const auto& q : boundary) out.push_back(q.position);
    return out;
}

double default_delta(std::size_t n) { return std::pow(2.0 / static_cast<double>(n), 0.25); }

std::size_t default_boundary_count(std::size_t n) {
    return static_cast<std::size_t>(std::llround(std::sqrt(8.0 * static_cast<double>(n))));
}

namespace {

using Polygon = std::vector<Eigen::Vector2d>;

// Keeps the part of the polygon with a . x <= b.
Polygon clip(const Polygon& poly, const Eigen::Vector2d& a, double b) {
    Polygon out;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& p = poly[i];
        const Eigen::Vector2d& q = poly[(i + 1) % n];
        const double fp = a.dot(p) - b;
        const double fq = a.dot(q) - b;
        if (fp <= 0.0) out.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) out.push_back(p + (fp / (fp - fq)) * (q - p));
    }
    return out;
}

double polygon_area(const Polygon& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        s += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * std::abs(s);
}

}  // namespace

std::vector<double> voronoi_areas(const ParametricManifold& m, const std::vector<Vec3>& points,
                                  std::size_t k) {
    const std::size_t n = points.size();
    if (n < 2) throw ConfigError("voronoi weights need at least two points", "n");
    const double spacing = std::sqrt(m.area() / static_cast<double>(n));
    const SpatialGrid grid(points, 2.0 * spacing);
    std::vector<double> areas(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3& p = points[i];
        const Eigen::Vector2d uv = m.parameters(p);
        const ChartJet j = m.jet(uv.x(), uv.y());
        Vec3 normal = j.du.cross(j.dv);
        if (normal.norm() < 1e-12) {
            // Chart pole; the normal is continuous, so step off it.
            const ChartJet off = m.jet(uv.x(), uv.y() + 1e-6);
            normal = off.du.cross(off.dv);
        }
        normal.normalize();
        Vec3 e1 = (std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY());
        e1 = (e1 - e1.dot(normal) * normal).normalized();
        const Vec3 e2 = normal.cross(e1);
        auto to_plane = [&](const Vec3& x) { return Eigen::Vector2d((x - p).dot(e1), (x - p).dot(e2)); };

        // Grow the neighbour set until no point outside it can clip the cell.
        Polygon cell;
        for (std::size_t kk = std::min(k, n - 1);; kk = std::min(2 * kk, n - 1)) {
            const auto nb = grid.nearest(p, kk + 1);
            double reach = 0.0;
            for (auto q : nb) reach = std::max(reach, (points[static_cast<std::size_t>(q)] - p).norm());
            const double half = 2.0 * reach;
            cell = {{-half, -half}, {half, -half}, {half, half}, {-half, half}};
            for (auto q : nb) {
                if (static_cast<std::size_t>(q) == i) continue;
                const Eigen::Vector2d d = to_plane(points[static_cast<std::size_t>(q)]);
                if (d.squaredNorm() == 0.0) continue;
                cell = clip(cell, d, 0.5 * d.squaredNorm());
            }
            if (m.distance_to_boundary(p) < 2.0 * half) {
                const BoundaryPoint b = m.boundary_point(uv.x());
                const Eigen::Vector2d c = to_plane(b.position);
                Eigen::Vector2d dir(b.conormal.dot(e1), b.conormal.dot(e2));
                if (dir.norm() > 1e-12) {
                    dir.normalize();
                    cell = clip(cell, dir, dir.dot(c));
                }
            }
            double radius = 0.0;
            for (const auto& v : cell) radius = std::max(radius, v.norm());
            if (2.0 * radius <= reach || kk == n - 1) break;
        }
        areas[i] = polygon_area(cell);
    }
    return areas;
}

PointCloud sample_manifold(const ParametricManifold& m, const SamplingOptions& opts) {
    if (opts.n < 16) throw ConfigError("need at least 16 interior points, got " + std::to_string(opts.n), "n");
    if (opts.m_b < 8) throw ConfigError("need at least 8 boundary points, got " + std::to_string(opts.m_b), "m_b");

    PointCloud cloud;
    cloud.manifold = m.name();
    cloud.seed = opts.seed;
    cloud.mode = opts.mode;
    cloud.delta = opts.delta.value_or(default_delta(opts.n));
    if (!(cloud.delta > 0.0)) throw ConfigError("delta must be positive", "delta");
    cloud.weights = opts.weights;
    if (cloud.weights == WeightMode::Auto) {
        cloud.weights = opts.mode == SamplingMode::Random ? WeightMode::Uniform : WeightMode::Voronoi;
    }

    std::vector<double> omegas(opts.m_b);
    cloud.interior.resize(opts.n);
    if (opts.mode == SamplingMode::Random) {
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& s : cloud.interior) {
            const double a = unit(rng);
            const double b = unit(rng);
            const Eigen::Vector2d uv = m.area_uniform_parameters(a, b);
            s.position = m.point(uv.x(), uv.y());
        }
        for (auto& w : omegas) w = kTwoPi * unit(rng);
    } else {
        // Equal-area golden-angle spiral.
        const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
        const auto n = static_cast<double>(opts.n);
        for (std::size_t i = 0; i < opts.n; ++i) {
            const double s = (static_cast<double>(i) + 0.5) / n;
            const double t = std::fmod(static_cast<double>(i) * golden, kTwoPi) / kTwoPi;
            const Eigen::Vector2d uv = m.area_uniform_parameters(s, t);
            cloud.interior[i].position = m.point(uv.x(), uv.y());
        }
        for (std::size_t k = 0; k < opts.m_b; ++k) {
            omegas[k] = kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(opts.m_b);
        }
    }

    cloud.boundary.resize(opts.m_b);
    for (std::size_t k = 0; k < opts.m_b; ++k) {
        const BoundaryPoint b = m.boundary_point(omegas[k]);
        cloud.boundary[k] = {b.position, 0.0, b.conormal, b.kappa_n};
    }

    if (cloud.weights == WeightMode::Uniform) {
        const double a = m.area() / static_cast<double>(opts.n);
        const double l = m.boundary_length() / static_cast<double>(opts.m_b);
        for (auto& s : cloud.interior) s.area = a;
        for (auto& q : cloud.boundary) q.length = l;
    } else {
        const auto areas = voronoi_areas(m, cloud.interior_positions());
        for (std::size_t i = 0; i < opts.n; ++i) cloud.interior[i].area = areas[i];
        // Boundary: half the parameter gap to each neighbour along the curve, times the speed.
        std::vector<std::size_t> order(opts.m_b);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return omegas[a] < omegas[b]; });
        for (std::size_t r = 0; r < opts.m_b; ++r) {
            const double w = omegas[order[r]];
            double prev = omegas[order[(r + opts.m_b - 1) % opts.m_b]];
            double next = omegas[order[(r + 1) % opts.m_b]];
            if (prev > w) prev -= kTwoPi;
            if (next < w) next += kTwoPi;
            cloud.boundary[order[r]].length = 0.5 * (next - prev) * m.boundary_point(w).length_element;
        }
    }
    return cloud;
}

PointCloud sample_hemisphere(std::size_t n, std::size_t m_b, std::uint64_t seed, SamplingMode mode,
                             WeightMode weights) {
    return sample_manifold(ParametricManifold::hemisphere(), {n, m_b, seed, mode, weights, std::nullopt});
}

PointCloud sample_disk(std::size_t n, std::size_t m_b, std::uint64_t seed, SamplingMode mode,
                       WeightMode weights) {
    return sample_manifold(ParametricManifold::disk(), {n, m_b, seed, mode, weights, std::nullopt});
}

}  // namespace nmp
