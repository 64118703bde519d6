#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nmp {

using Vec3 = Eigen::Vector3d;
using ScalarField = std::function<double(const Vec3&)>;

/// Chart value and derivatives up to second order at a parameter point.
struct ChartJet {
    Vec3 point, du, dv, duu, duv, dvv;
};

struct BoundaryPoint {
    double param = 0.0;
    Vec3 position = Vec3::Zero();
    Vec3 tangent = Vec3::Zero();   // unit
    Vec3 conormal = Vec3::Zero();  // unit, tangent to the surface, outward
    Vec3 surface_normal = Vec3::Zero();
    double kappa_n = 0.0;
    double length_element = 0.0;   // |d psi / d omega|
};

/// Surface with a single chart Phi(u, v): u in [0, 2 pi) periodic, v in [v_min, v_max],
/// boundary at v = v_max. The v-lines are unit-speed geodesics meeting the boundary
/// orthogonally, so the inward geodesic from a boundary point is s -> Phi(u, v_max - s)
/// and the geodesic distance to the boundary is v_max - v.
class ParametricManifold {
public:
    using ChartFn = std::function<ChartJet(double u, double v)>;
    using InverseFn = std::function<Eigen::Vector2d(const Vec3&)>;
    /// Maps a point of the unit square to chart parameters; uniform input gives area-uniform output.
    using AreaSamplerFn = std::function<Eigen::Vector2d(double, double)>;

    ParametricManifold(std::string name, ChartFn chart, InverseFn inverse, AreaSamplerFn sampler,
                       double v_min, double v_max, double area, double boundary_length);

    /// Unit upper hemisphere x^2 + y^2 + z^2 = 1, z >= 0 (polar angle chart).
    static ParametricManifold hemisphere();

    /// Flat disk of the given radius in the z = 0 plane (polar chart).
    static ParametricManifold disk(double radius = 1.0);

    const std::string& name() const noexcept { return name_; }
    double v_min() const noexcept { return v_min_; }
    double v_max() const noexcept { return v_max_; }
    double area() const noexcept { return area_; }
    double boundary_length() const noexcept { return boundary_length_; }

    ChartJet jet(double u, double v) const { return chart_(u, v); }
    Vec3 point(double u, double v) const { return chart_(u, v).point; }
    Vec3 surface_normal(double u, double v) const;
    double area_element(double u, double v) const;
    Eigen::Matrix2d metric(double u, double v) const;
    Eigen::Vector2d parameters(const Vec3& x) const { return inverse_(x); }
    Eigen::Vector2d area_uniform_parameters(double s, double t) const { return sampler_(s, t); }

    Vec3 boundary(double omega) const { return point(omega, v_max_); }
    BoundaryPoint boundary_point(double omega) const;

    /// h^{ij} l_{ij} of the boundary chart against the outward conormal.
    /// Throws GeometryError when the boundary metric is degenerate.
    double kappa_n(double omega) const;

    Vec3 inward_geodesic(double omega, double s) const { return point(omega, v_max_ - s); }
    double distance_to_boundary(const Vec3& x) const { return v_max_ - parameters(x).y(); }

    bool contains(const Vec3& x, double tol = 1e-9) const;
    bool on_boundary(const Vec3& x, double tol = 1e-9) const;

private:
    std::string name_;
    ChartFn chart_;
    InverseFn inverse_;
    AreaSamplerFn sampler_;
    double v_min_, v_max_, area_, boundary_length_;
};

/// Laplace-Beltrami of f at chart point (u, v) from the chart metric, central
/// differences with parameter step h (second order in h).
double laplace_beltrami(const ParametricManifold& m, const ScalarField& f, double u, double v, double h);

/// Laplacian of f along the boundary curve (arc-length second derivative) at omega.
double boundary_laplacian(const ParametricManifold& m, const ScalarField& f, double omega, double h);

// ---------------------------------------------------------------------------
// Point clouds

enum class SamplingMode { Random, Lattice };
enum class WeightMode { Auto, Uniform, Voronoi };

const char* to_string(SamplingMode m) noexcept;
const char* to_string(WeightMode m) noexcept;
SamplingMode parse_sampling_mode(const std::string& s);
WeightMode parse_weight_mode(const std::string& s);

struct InteriorSample {
    Vec3 position = Vec3::Zero();
    double area = 0.0;
};

struct BoundarySample {
    Vec3 position = Vec3::Zero();
    double length = 0.0;
    Vec3 conormal = Vec3::Zero();
    double kappa = 0.0;
};

struct PointCloud {
    std::string manifold;
    std::uint64_t seed = 0;
    double delta = 0.0;
    SamplingMode mode = SamplingMode::Random;
    WeightMode weights = WeightMode::Uniform;
    std::vector<InteriorSample> interior;
    std::vector<BoundarySample> boundary;

    double total_area() const;
    double total_length() const;
    std::vector<Vec3> interior_positions() const;
    std::vector<Vec3> boundary_positions() const;
};

/// delta = (2 / n)^(1/4)
double default_delta(std::size_t n);

/// Boundary count used with n interior points when none is given: round(sqrt(8 n)).
std::size_t default_boundary_count(std::size_t n);

struct SamplingOptions {
    std::size_t n = 512;
    std::size_t m_b = 64;
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::Random;
    WeightMode weights = WeightMode::Auto;  // uniform for random, voronoi for lattice
    std::optional<double> delta;            // default_delta(n) when empty
};

PointCloud sample_manifold(const ParametricManifold& m, const SamplingOptions& opts);

PointCloud sample_hemisphere(std::size_t n, std::size_t m_b, std::uint64_t seed,
                             SamplingMode mode, WeightMode weights = WeightMode::Auto);

PointCloud sample_disk(std::size_t n, std::size_t m_b, std::uint64_t seed, SamplingMode mode,
                       WeightMode weights = WeightMode::Auto);

/// Tangent-plane Voronoi cell areas from the k nearest neighbours, clipped at the boundary.
std::vector<double> voronoi_areas(const ParametricManifold& m, const std::vector<Vec3>& points,
                                  std::size_t k = 12);

}  // namespace nmp
