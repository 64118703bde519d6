#include "nmp/problems.hpp"

#include <cmath>

#include "nmp/error.hpp"

namespace nmp {

TestProblem hemisphere_z2() {
    TestProblem p{"z2", ParametricManifold::hemisphere(), {}, {}, {}, {}, {}, true};
    p.u_exact = [](const Vec3& x) { return x.z() * x.z(); };
    p.f = [](const Vec3& x) { return 6.0 * x.z() * x.z() - 2.0; };
    p.g = [](const Vec3&) { return 0.0; };
    p.laplacian_boundary_g = [](const Vec3&) { return 0.0; };
    // grad_S z^2 = 2z (e_z - z x); zero on the equator.
    p.du_dn_exact = [](const Vec3& x) { return -2.0 * x.z() * (1.0 - x.z() * x.z()); };
    return p;
}

TestProblem hemisphere_x(bool printed_rhs) {
    TestProblem p{printed_rhs ? "x_printed_rhs" : "x", ParametricManifold::hemisphere(), {}, {}, {}, {}, {}, false};
    p.u_exact = [](const Vec3& x) { return x.x(); };
    if (printed_rhs) {
        p.f = [](const Vec3& x) {
            const double a = x.x(), b = x.y();
            const double den = 1.0 + 8.0 * a * a + 0.3125 * b * b;
            return 2.25 * (5.0 + 8.0 * a * a + 1.25 * b * b) * a / (den * den);
        };
    } else {
        p.f = [](const Vec3& x) { return 2.0 * x.x(); };
    }
    p.g = [](const Vec3& x) { return x.x(); };
    // x = cos(omega) on the unit circle.
    p.laplacian_boundary_g = [](const Vec3& x) { return -x.x(); };
    // grad_S x = e_x - x (x, y, z); the conormal (0, 0, -1) sees -(-x z) = x z = 0 on z = 0.
    p.du_dn_exact = [](const Vec3& x) { return x.x() * x.z(); };
    return p;
}

TestProblem disk_quadratic(double radius) {
    TestProblem p{"quadratic", ParametricManifold::disk(radius), {}, {}, {}, {}, {}, true};
    const double r2 = radius * radius;
    p.u_exact = [r2](const Vec3& x) { return r2 - x.x() * x.x() - x.y() * x.y(); };
    p.f = [](const Vec3&) { return 4.0; };
    p.g = [](const Vec3&) { return 0.0; };
    p.laplacian_boundary_g = [](const Vec3&) { return 0.0; };
    p.du_dn_exact = [](const Vec3& x) { return -2.0 * std::hypot(x.x(), x.y()); };
    return p;
}

TestProblem zero_problem(const ParametricManifold& m) {
    auto zero = [](const Vec3&) { return 0.0; };
    return TestProblem{"zero", m, zero, zero, zero, zero, zero, true};
}

std::vector<std::string> problem_ids(const std::string& manifold) {
    if (manifold == "hemisphere") return {"z2", "x", "x_printed_rhs", "zero"};
    if (manifold == "disk") return {"quadratic", "zero"};
    return {};
}

TestProblem make_problem(const std::string& manifold, const std::string& id) {
    if (manifold == "hemisphere") {
        if (id == "z2") return hemisphere_z2();
        if (id == "x") return hemisphere_x(false);
        if (id == "x_printed_rhs") return hemisphere_x(true);
        if (id == "zero") return zero_problem(ParametricManifold::hemisphere());
    } else if (manifold == "disk") {
        if (id == "quadratic") return disk_quadratic();
        if (id == "zero") return zero_problem(ParametricManifold::disk());
    } else {
        throw ConfigError("unknown manifold '" + manifold + "' (expected hemisphere or disk)", "manifold");
    }
    throw ConfigError("problem '" + id + "' is not defined on the " + manifold, "problem");
}

double identity_residual(const TestProblem& problem, double omega, double h) {
    const ParametricManifold& m = problem.manifold;
    const auto& u = problem.u_exact;
    const double back = u(m.inward_geodesic(omega, -h));
    const double mid = u(m.inward_geodesic(omega, 0.0));
    const double fwd = u(m.inward_geodesic(omega, h));
    const double u_nn = (back - 2.0 * mid + fwd) / (h * h);
    const double u_n = (back - fwd) / (2.0 * h);
    const double lap = laplace_beltrami(m, u, omega, m.v_max(), h);
    const double lap_b = boundary_laplacian(m, u, omega, h);
    return std::abs(u_nn - lap + lap_b - m.kappa_n(omega) * u_n);
}

}  // namespace nmp
