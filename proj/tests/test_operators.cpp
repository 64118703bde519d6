#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

#include "nmp/error.hpp"
#include "nmp/operators.hpp"

using namespace nmp;
using std::numbers::pi;

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

double cos_r(double t) { return t >= 1.0 ? 0.0 : 0.5 * (1.0 + std::cos(pi * t)); }
double cos_bar(double t) { return t >= 1.0 ? 0.0 : 0.5 * (1.0 - t) - std::sin(pi * t) / (2.0 * pi); }
double cos_barbar(double t) {
    return t >= 1.0 ? 0.0 : 0.25 * (1.0 - t) * (1.0 - t) - (1.0 + std::cos(pi * t)) / (2.0 * pi * pi);
}

// Shared grids: construction at resolution 400 is the expensive part.
const QuadratureGrid& hemisphere_grid(int res) {
    static const QuadratureGrid g100(ParametricManifold::hemisphere(), 100);
    static const QuadratureGrid g200(ParametricManifold::hemisphere(), 200);
    static const QuadratureGrid g400(ParametricManifold::hemisphere(), 400);
    return res == 100 ? g100 : res == 200 ? g200 : g400;
}

const QuadratureGrid& disk_grid() {
    static const QuadratureGrid g(ParametricManifold::disk(1.0), 200);
    return g;
}

}  // namespace

TEST_CASE("quadrature grid totals") {
    const auto& g = hemisphere_grid(400);
    CHECK(std::abs(g.total_area() / (2.0 * pi) - 1.0) <= 1e-4);
    CHECK(std::abs(g.total_length() / (2.0 * pi) - 1.0) <= 1e-12);
    CHECK(std::abs(disk_grid().total_area() / pi - 1.0) <= 1e-4);
    CHECK_THROWS_AS(QuadratureGrid(ParametricManifold::disk(), 2), ConfigError);
}

TEST_CASE("operators annihilate trivial inputs") {
    const NonlocalOperators ops(hemisphere_grid(100), KernelFamily::cosine(0.2));
    const auto h = ParametricManifold::hemisphere();
    const ScalarField one = [](const Vec3&) { return 1.0; };
    const ScalarField zero = [](const Vec3&) { return 0.0; };
    for (double v : {0.2, 1.0, 1.5}) {
        const auto x = EvalPoint::interior(h.point(0.4, v));
        CHECK(std::abs(ops.apply(OperatorKind::L, x, one)) <= 1e-12);
        CHECK(ops.apply(OperatorKind::P, x, zero) == 0.0);
        CHECK(ops.apply(OperatorKind::G, x, zero) == 0.0);
    }
    const auto b = EvalPoint::boundary(h.boundary_point(2.0));
    CHECK(ops.apply(OperatorKind::Q, b, zero) == 0.0);
    CHECK(ops.apply(OperatorKind::D, b, zero) == 0.0);
}

TEST_CASE("domain checks") {
    const NonlocalOperators ops(hemisphere_grid(100), KernelFamily::cosine(0.2));
    const auto h = ParametricManifold::hemisphere();
    const ScalarField one = [](const Vec3&) { return 1.0; };
    const auto inside = EvalPoint::interior(h.point(0.1, 0.5));
    CHECK_THROWS_AS(ops.apply(OperatorKind::D, inside, one), DomainError);
    CHECK_THROWS_AS(ops.apply(OperatorKind::Rtilde, inside), DomainError);
    CHECK_THROWS_AS(ops.apply(OperatorKind::L, EvalPoint::interior(Vec3(0, 0, 2)), one), DomainError);
    CHECK_THROWS_AS(ops.apply(OperatorKind::L, inside), DomainError);
    CHECK_NOTHROW(ops.apply(OperatorKind::L, EvalPoint::interior(h.boundary(0.3)), one));
}

TEST_CASE("L of a quadratic at the disk centre matches a radial integral") {
    const double delta = 0.1;
    const NonlocalOperators ops(disk_grid(), KernelFamily::cosine(delta));
    const ScalarField u = [](const Vec3& y) { return 1.0 - y.squaredNorm(); };
    const double c = 1.0 / (4.0 * pi * delta * delta);
    const double expected = c / (delta * delta) * 2.0 * pi *
                            GK::integrate([&](double r) { return r * r * r * cos_r(r * r / (4 * delta * delta)); },
                                          0.0, 2.0 * delta, 5, 1e-13);
    const double got = ops.apply(OperatorKind::L, EvalPoint::interior(Vec3(0, 0, 0)), u);
    CHECK(got == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("Rtilde matches independent quadrature") {
    for (double delta : {0.1, 0.2}) {
        CAPTURE(delta);
        const double c = 1.0 / (4.0 * pi * delta * delta);
        const double four_d2 = 4.0 * delta * delta;

        // Equator of the unit sphere: kappa_n = 0, chord^2 = 2 - 2 cos(theta).
        const NonlocalOperators hem(hemisphere_grid(400), KernelFamily::cosine(delta));
        const double hem_expected =
            four_d2 * c *
            GK::integrate([&](double t) { return cos_barbar((2.0 - 2.0 * std::cos(t)) / four_d2); }, -pi, pi, 12, 1e-12);
        const auto hb = EvalPoint::boundary(ParametricManifold::hemisphere().boundary_point(0.7));
        CHECK(hem.apply(OperatorKind::Rtilde, hb) == doctest::Approx(hem_expected).epsilon(1e-8));
        CHECK(hem.boundary_barbar_integral(hb) == doctest::Approx(hem_expected).epsilon(1e-8));

        // Unit circle in the plane: kappa_n = -1 adds int_M ((x - y).n)^2 Rbar.
        const NonlocalOperators dsk(disk_grid(), KernelFamily::cosine(delta));
        const Vec3 x(1, 0, 0);
        const double line = four_d2 * c *
                            GK::integrate([&](double t) { return cos_barbar((2.0 - 2.0 * std::cos(t)) / four_d2); },
                                          -pi, pi, 12, 1e-12);
        const double area = c * GK::integrate(
                                    [&](double r) {
                                        return r * GK::integrate(
                                                       [&](double t) {
                                                           const Vec3 y(r * std::cos(t), r * std::sin(t), 0.0);
                                                           const double s = (x - y).x();
                                                           return s * s * cos_bar((x - y).squaredNorm() / four_d2);
                                                       },
                                                       -pi, pi, 12, 1e-11);
                                    },
                                    1.0 - 2.0 * delta, 1.0, 12, 1e-10);
        const auto db = EvalPoint::boundary(ParametricManifold::disk(1.0).boundary_point(0.0));
        CHECK(dsk.apply(OperatorKind::Rtilde, db) == doctest::Approx(line + area).epsilon(2e-4));
    }
}

TEST_CASE("G and D are adjoint under the quadrature") {
    const NonlocalOperators ops(disk_grid(), KernelFamily::cosine(0.15));
    const ScalarField w = [](const Vec3& y) { return std::cos(2.0 * y.x()) + y.y() * y.y(); };
    const ScalarField s = [](const Vec3& y) { return std::sin(3.0 * y.y()) + 0.5; };
    const auto a = ops.adjointness(w, s);
    CHECK(std::abs(a.interior_side - a.boundary_side) <= 1e-10 * a.w_norm * a.s_norm);
    CHECK(std::abs(a.interior_side) > 1e-3);
}

TEST_CASE("zero problem has zero truncation") {
    const auto problem = zero_problem(ParametricManifold::hemisphere());
    const auto probes = interior_probe_points(problem.manifold, 0.5, 8);
    const auto t = probe_truncation(problem, hemisphere_grid(100), 0.2, probes, 8);
    CHECK(t.interior_rms == 0.0);
    CHECK(t.boundary_l2 == 0.0);
}

TEST_CASE("interior probes keep their distance from the boundary") {
    const auto h = ParametricManifold::hemisphere();
    const auto probes = interior_probe_points(h, 0.41, 64);
    REQUIRE(probes.size() == 64);
    for (const auto& p : probes) {
        CHECK(h.contains(p));
        CHECK(h.distance_to_boundary(p) >= 0.41 - 1e-12);
    }
    CHECK_THROWS_AS(interior_probe_points(h, 2.0), ConfigError);
}

TEST_CASE("midpoint quadrature error of the truncation decays with resolution") {
    // r_in at fixed delta converges at the midpoint rate h^2 as the grid refines.
    const auto problem = hemisphere_z2();
    const auto probes = interior_probe_points(problem.manifold, 0.41, 16);
    const double delta = 0.2;
    const NonlocalOperators o1(hemisphere_grid(100), KernelFamily::cosine(delta));
    const NonlocalOperators o2(hemisphere_grid(200), KernelFamily::cosine(delta));
    const NonlocalOperators o4(hemisphere_grid(400), KernelFamily::cosine(delta));
    double d12 = 0.0, d24 = 0.0;
    for (const auto& p : probes) {
        const auto x = EvalPoint::interior(p);
        const double r1 = o1.truncation_interior(problem, x);
        const double r2 = o2.truncation_interior(problem, x);
        const double r4 = o4.truncation_interior(problem, x);
        d12 = std::max(d12, std::abs(r1 - r2));
        d24 = std::max(d24, std::abs(r2 - r4));
    }
    MESSAGE("max |r(100)-r(200)| = " << d12 << ", max |r(200)-r(400)| = " << d24);
    CHECK(d12 / d24 >= 3.0);
    CHECK(d12 / d24 <= 5.0);
}

TEST_CASE("interior truncation is second order in delta") {
    const auto problem = hemisphere_z2();
    const auto probes = interior_probe_points(problem.manifold, 0.41, 32);
    const auto coarse = probe_truncation(problem, hemisphere_grid(100), hemisphere_grid(200), 0.2, probes, 32);
    const auto fine = probe_truncation(problem, hemisphere_grid(100), hemisphere_grid(200), 0.1, probes, 32);
    const double ratio = coarse.interior_rms / fine.interior_rms;
    CAPTURE(ratio);
    CHECK(ratio >= 2.8);
    CHECK(ratio <= 5.7);
}
