#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "nmp/cloud_io.hpp"
#include "nmp/error.hpp"
#include "nmp/geometry.hpp"
#include "nmp/problems.hpp"
#include "nmp/spatial.hpp"

using namespace nmp;
using std::numbers::pi;

TEST_CASE("reference manifolds") {
    const auto h = ParametricManifold::hemisphere();
    CHECK(h.area() == doctest::Approx(2.0 * pi));
    CHECK(h.boundary_length() == doctest::Approx(2.0 * pi));
    const auto d = ParametricManifold::disk(2.0);
    CHECK(d.area() == doctest::Approx(4.0 * pi));
    CHECK(d.boundary_length() == doctest::Approx(4.0 * pi));

    for (double w : {0.0, 0.7, 2.0, 5.5}) {
        const BoundaryPoint b = h.boundary_point(w);
        CHECK(b.position.z() == doctest::Approx(0.0));
        CHECK(b.conormal.dot(Vec3(0, 0, -1)) == doctest::Approx(1.0));
        CHECK(b.tangent.norm() == doctest::Approx(1.0));
        CHECK(std::abs(b.kappa_n) <= 1e-6);

        const BoundaryPoint bd = d.boundary_point(w);
        CHECK(bd.conormal.dot(bd.position / 2.0) == doctest::Approx(1.0));
        CHECK(bd.kappa_n == doctest::Approx(-0.5).epsilon(1e-6));
        CHECK(ParametricManifold::disk(1.0).kappa_n(w) == doctest::Approx(-1.0).epsilon(1e-6));
    }
}

TEST_CASE("chart round trip and containment") {
    const auto h = ParametricManifold::hemisphere();
    const Vec3 x = h.point(1.3, 0.4);
    const Eigen::Vector2d uv = h.parameters(x);
    CHECK(uv.x() == doctest::Approx(1.3));
    CHECK(uv.y() == doctest::Approx(0.4));
    CHECK(h.contains(x));
    CHECK_FALSE(h.contains(Vec3(0, 0, -1)));
    CHECK(h.on_boundary(h.boundary(0.3)));
    CHECK(h.distance_to_boundary(x) == doctest::Approx(pi / 2 - 0.4));
    CHECK(h.area_element(0.2, 0.4) == doctest::Approx(std::sin(0.4)));
}

TEST_CASE("laplace-beltrami of coordinate functions") {
    const auto h = ParametricManifold::hemisphere();
    // -Lap_S x = 2x, -Lap_S z^2 = 6 z^2 - 2 on the unit sphere
    for (double v : {0.3, 0.8, 1.2}) {
        const Vec3 p = h.point(0.9, v);
        CHECK(laplace_beltrami(h, [](const Vec3& q) { return q.x(); }, 0.9, v, 1e-3) ==
              doctest::Approx(-2.0 * p.x()).epsilon(1e-5));
        CHECK(laplace_beltrami(h, [](const Vec3& q) { return q.z() * q.z(); }, 0.9, v, 1e-3) ==
              doctest::Approx(2.0 - 6.0 * p.z() * p.z()).epsilon(1e-5));
    }
}

TEST_CASE("boundary identity holds for the reference problems") {
    for (const auto& problem : {hemisphere_z2(), hemisphere_x(), disk_quadratic()}) {
        CAPTURE(problem.id);
        double worst = 0.0, coarse = 0.0, fine = 0.0;
        for (int i = 0; i < 32; ++i) {
            const double w = 2.0 * pi * (i + 0.5) / 32.0;
            worst = std::max(worst, identity_residual(problem, w, 1e-3));
            coarse = std::max(coarse, identity_residual(problem, w, 2e-2));
            fine = std::max(fine, identity_residual(problem, w, 1e-2));
        }
        CHECK(worst <= 1e-4);
        if (coarse > 1e-8) {
            const double ratio = coarse / fine;
            CAPTURE(ratio);
            CHECK(ratio >= 3.5);
            CHECK(ratio <= 4.5);
        }
    }
}

TEST_CASE("problem registry") {
    CHECK(make_problem("hemisphere", "z2").homogeneous);
    CHECK_FALSE(make_problem("hemisphere", "x").homogeneous);
    CHECK(make_problem("disk", "quadratic").id == "quadratic");
    CHECK_THROWS_AS(make_problem("hemisphere", "nope"), ConfigError);
    CHECK_THROWS_AS(make_problem("torus", "z2"), ConfigError);
    const auto z = make_problem("disk", "zero");
    CHECK(z.f(Vec3(0.1, 0.2, 0.0)) == 0.0);
    const auto x = hemisphere_x();
    const Vec3 p(0.6, 0.0, 0.8);
    CHECK(x.f(p) == doctest::Approx(1.2));
    CHECK(x.g(Vec3(1, 0, 0)) == 1.0);
}

TEST_CASE("sampling is deterministic and seed dependent") {
    const auto a = sample_hemisphere(500, 60, 7, SamplingMode::Random);
    const auto b = sample_hemisphere(500, 60, 7, SamplingMode::Random);
    const auto c = sample_hemisphere(500, 60, 8, SamplingMode::Random);
    REQUIRE(a.interior.size() == 500);
    REQUIRE(a.boundary.size() == 60);
    bool same = true, differ = false;
    for (std::size_t i = 0; i < 500; ++i) {
        same = same && a.interior[i].position == b.interior[i].position;
        differ = differ || a.interior[i].position != c.interior[i].position;
    }
    CHECK(same);
    CHECK(differ);
    CHECK(a.weights == WeightMode::Uniform);
    CHECK(a.delta == doctest::Approx(default_delta(500)));
    CHECK(a.total_area() == doctest::Approx(2.0 * pi));
    CHECK(a.total_length() == doctest::Approx(2.0 * pi));
    const auto h = ParametricManifold::hemisphere();
    for (const auto& s : a.interior) CHECK(h.contains(s.position));
}

TEST_CASE("lattice voronoi areas sum to the manifold area") {
    for (std::size_t n : {2000u, 8000u}) {
        const auto h = sample_hemisphere(n, default_boundary_count(n), 1, SamplingMode::Lattice);
        CHECK(h.weights == WeightMode::Voronoi);
        CHECK(std::abs(h.total_area() / (2.0 * pi) - 1.0) <= 2e-3);
        const auto d = sample_disk(n, default_boundary_count(n), 1, SamplingMode::Lattice);
        CHECK(std::abs(d.total_area() / pi - 1.0) <= 2e-3);
    }
}

TEST_CASE("random voronoi areas are positive and sum near the area") {
    const auto h = sample_hemisphere(4000, default_boundary_count(4000), 3, SamplingMode::Random,
                                     WeightMode::Voronoi);
    for (const auto& s : h.interior) CHECK(s.area > 0.0);
    CHECK(std::abs(h.total_area() / (2.0 * pi) - 1.0) <= 0.01);
}

TEST_CASE("default counts") {
    CHECK(default_delta(2) == doctest::Approx(1.0));
    CHECK(default_delta(512) == doctest::Approx(0.25));
    CHECK(default_boundary_count(512) == 64);
}

TEST_CASE("sampling option validation") {
    const auto h = ParametricManifold::hemisphere();
    SamplingOptions o;
    o.n = 0;
    CHECK_THROWS_AS(sample_manifold(h, o), ConfigError);
    o.n = 100;
    o.m_b = 0;
    CHECK_THROWS_AS(sample_manifold(h, o), ConfigError);
    o.m_b = 10;
    o.delta = -1.0;
    CHECK_THROWS_AS(sample_manifold(h, o), ConfigError);
    CHECK_THROWS_AS(parse_sampling_mode("grid"), ConfigError);
    CHECK(parse_weight_mode("voronoi") == WeightMode::Voronoi);
}

TEST_CASE("cloud json round trip") {
    const auto a = sample_disk(200, 30, 4, SamplingMode::Random);
    const auto b = cloud_from_json(cloud_to_json(a));
    CHECK(b.manifold == a.manifold);
    CHECK(b.seed == a.seed);
    CHECK(b.delta == a.delta);
    REQUIRE(b.interior.size() == a.interior.size());
    REQUIRE(b.boundary.size() == a.boundary.size());
    for (std::size_t i = 0; i < a.interior.size(); ++i) {
        CHECK(b.interior[i].position == a.interior[i].position);
        CHECK(b.interior[i].area == a.interior[i].area);
    }
    for (std::size_t i = 0; i < a.boundary.size(); ++i) {
        CHECK(b.boundary[i].conormal == a.boundary[i].conormal);
        CHECK(b.boundary[i].kappa == a.boundary[i].kappa);
    }
    std::ostringstream csv;
    write_cloud_csv(csv, a);
    const std::string text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 200 + 30);
    CHECK_THROWS_AS(cloud_from_json(nlohmann::json{{"delta", 0.1}}), IoError);
}

TEST_CASE("spatial grid matches brute force") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec3> pts(3000);
    for (auto& p : pts) p = Vec3(u(rng), u(rng), 0.3 * u(rng));
    const SpatialGrid grid(pts, 0.15);
    std::vector<std::int32_t> idx;
    std::vector<double> d2;
    for (int t = 0; t < 50; ++t) {
        const Vec3 q(u(rng), u(rng), u(rng) * 0.3);
        const double radius = 0.05 + 0.3 * std::abs(u(rng));
        idx.clear();
        d2.clear();
        grid.query(q, radius, idx, d2);
        std::vector<std::int32_t> brute;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if ((pts[i] - q).norm() < radius) brute.push_back(static_cast<std::int32_t>(i));
        std::vector<std::int32_t> got = idx;
        std::sort(got.begin(), got.end());
        CHECK(got == brute);
        for (std::size_t k = 0; k < idx.size(); ++k) CHECK(d2[k] == doctest::Approx((pts[idx[k]] - q).squaredNorm()));

        const auto near = grid.nearest(q, 5);
        std::vector<std::int32_t> order(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) order[i] = static_cast<std::int32_t>(i);
        std::partial_sort(order.begin(), order.begin() + 5, order.end(), [&](auto a, auto b) {
            const double da = (pts[a] - q).squaredNorm(), db = (pts[b] - q).squaredNorm();
            return da < db || (da == db && a < b);
        });
        CHECK(near == std::vector<std::int32_t>(order.begin(), order.begin() + 5));
    }
}
