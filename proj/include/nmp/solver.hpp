#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "nmp/assembly.hpp"

namespace nmp {

struct SolveOptions {
    double tol = 1e-10;           // relative residual of the reduced system
    std::size_t max_iter = 0;     // 0 means 10 n
    /// Called after every iteration with the current iterate.
    std::function<void(std::size_t iteration, double relative_residual, std::span<const double> u)> on_iteration;
};

struct SolveResult {
    std::vector<double> u;
    std::vector<double> v;
    std::size_t iterations = 0;
    double residual = 0.0;
    double wall_time = 0.0;  // seconds
    std::vector<double> history;
};

/// Jacobi-preconditioned CG on the Schur complement from u = 0, then
/// v = (rhs_boundary - D u) / Rtilde. NonConvergenceError carries the history.
SolveResult solve(const DiscreteSystem& system, const SolveOptions& options = {});

/// Dense Cholesky of the Schur complement; for cross-checks at small n.
SolveResult dense_solve(const DiscreteSystem& system);

/// Relative residuals of the two block equations: |r| / max(|rhs|, |A x|).
struct BlockResidual {
    double interior;
    double boundary;
};
BlockResidual block_residual(const DiscreteSystem& system, const SolveResult& result);

/// kind,x,y,z,value rows for u at interior points and v at boundary points.
void write_solution_csv(std::ostream& os, const DiscreteSystem& system, const SolveResult& result);

}  // namespace nmp
