#pragma once

#include <string>
#include <vector>

#include "nmp/geometry.hpp"

namespace nmp {

/// Poisson problem -Lap_M u = f on M, u = g on the boundary, with known solution.
struct TestProblem {
    std::string id;
    ParametricManifold manifold;
    ScalarField u_exact;
    ScalarField f;
    ScalarField g;                     // boundary data
    ScalarField laplacian_boundary_g;  // Lap along the boundary curve of g
    ScalarField du_dn_exact;           // outward conormal derivative, boundary points only
    bool homogeneous = true;
};

/// Hemisphere, u = z^2, f = 6 z^2 - 2, g = 0.
TestProblem hemisphere_z2();

/// Hemisphere, u = x, g = x. f = 2x (the exact -Lap_S x) unless `printed_rhs`
/// selects the rational right-hand side published with the original experiment.
TestProblem hemisphere_x(bool printed_rhs = false);

/// Disk of radius rho, u = rho^2 - x^2 - y^2, f = 4, g = 0.
TestProblem disk_quadratic(double radius = 1.0);

/// u = 0, f = 0, g = 0 on the given manifold.
TestProblem zero_problem(const ParametricManifold& m);

/// Looks up a problem by identifier: z2, x, x_printed_rhs (hemisphere), quadratic (disk), zero (either).
TestProblem make_problem(const std::string& manifold, const std::string& id);

std::vector<std::string> problem_ids(const std::string& manifold);

/// |u_nn - Lap_M u + Lap_b g - kappa_n u_n| at boundary parameter omega, every
/// derivative by central differences with step h. Zero for the exact solution
/// by the boundary identity relating normal and tangential second derivatives.
double identity_residual(const TestProblem& problem, double omega, double h);

}  // namespace nmp
