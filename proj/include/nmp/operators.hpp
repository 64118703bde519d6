#pragma once

// Continuous nonlocal operators evaluated by tensor-product midpoint quadrature
// in chart parameters, and the truncation residuals of the exact solution.

#include <string>
#include <vector>

#include "nmp/geometry.hpp"
#include "nmp/kernels.hpp"
#include "nmp/problems.hpp"
#include "nmp/spatial.hpp"

namespace nmp {

/// Midpoint nodes of the chart rectangle and of the boundary curve with their
/// area / length weights. `resolution` is nodes per unit parameter length.
struct QuadratureGrid {
    QuadratureGrid(const ParametricManifold& m, int resolution);

    ParametricManifold manifold;
    int resolution;
    std::vector<Vec3> interior_nodes;
    std::vector<double> interior_weights;
    std::vector<Vec3> boundary_nodes;
    std::vector<double> boundary_weights;
    std::vector<Vec3> boundary_conormals;
    std::vector<double> boundary_kappa;

    double total_area() const;
    double total_length() const;
};

enum class OperatorKind { L, G, D, P, Q, S, Rtilde, Ptilde };

const char* to_string(OperatorKind k) noexcept;

/// Evaluation point; boundary operators need the conormal and kappa_n there.
struct EvalPoint {
    Vec3 position = Vec3::Zero();
    bool on_boundary = false;
    Vec3 conormal = Vec3::Zero();
    double kappa_n = 0.0;

    static EvalPoint interior(const Vec3& x) { return {x, false, Vec3::Zero(), 0.0}; }
    static EvalPoint boundary(const BoundaryPoint& b) { return {b.position, true, b.conormal, b.kappa_n}; }
};

class NonlocalOperators {
public:
    NonlocalOperators(const QuadratureGrid& grid, KernelFamily kernel);

    const KernelFamily& kernel() const noexcept { return kernel_; }
    const QuadratureGrid& grid() const noexcept { return grid_; }

    /// L, G, P, S need x in M; D, Q, Rtilde, Ptilde need x on the boundary
    /// (DomainError otherwise). `field` is u for L and D, the boundary density
    /// for G, f for P and Q, Lap_b g for S; Rtilde and Ptilde ignore it.
    double apply(OperatorKind which, const EvalPoint& x, const ScalarField& field = {}) const;

    /// 4 delta^2 int_{dM} Rbarbar_delta(x, y) dtau_y
    double boundary_barbar_integral(const EvalPoint& x) const;

    /// r_in = L u - G du/dn - P f (- S Lap_b g for non-homogeneous data).
    double truncation_interior(const TestProblem& problem, const EvalPoint& x) const;

    /// r_bd = D u + Rtilde du/dn - Q f (- Ptilde g for non-homogeneous data).
    double truncation_boundary(const TestProblem& problem, const EvalPoint& x) const;

    /// int_M w (G s) dmu and int_dM s (D w) dtau, accumulated in different orders.
    struct Adjointness {
        double interior_side;
        double boundary_side;
        double w_norm;  // L2(M)
        double s_norm;  // L2(dM)
    };
    Adjointness adjointness(const ScalarField& w, const ScalarField& s) const;

private:
    struct Neighbourhood {
        std::vector<std::int32_t> index;
        std::vector<double> sqdist, scratch, k0, k1, k2;
    };

    void gather(const SpatialGrid& grid, const Vec3& x, Neighbourhood& nb) const;
    void require(OperatorKind which, const EvalPoint& x) const;

    const QuadratureGrid& grid_;
    KernelFamily kernel_;
    SpatialGrid interior_index_;
    SpatialGrid boundary_index_;
};

/// Residual norms of the exact solution at one delta.
struct TruncationSample {
    double delta;
    double interior_rms;   // RMS of r_in over interior probe points
    double boundary_l2;    // L2(dM) norm of r_bd
};

/// Evaluates r_in at the interior probes and r_bd at `boundary_probes`
/// equispaced boundary parameters.
TruncationSample probe_truncation(const TestProblem& problem, const QuadratureGrid& grid, double delta,
                                  const std::vector<Vec3>& interior_probes, int boundary_probes = 64);

/// As above with one Richardson step: residuals from `coarse` and `fine`
/// (twice the resolution) are combined pointwise as (4 r_fine - r_coarse) / 3,
/// cancelling the O(h^2) midpoint error.
TruncationSample probe_truncation(const TestProblem& problem, const QuadratureGrid& coarse,
                                  const QuadratureGrid& fine, double delta,
                                  const std::vector<Vec3>& interior_probes, int boundary_probes = 64);

/// Interior probe points at geodesic distance > min_distance from the boundary.
std::vector<Vec3> interior_probe_points(const ParametricManifold& m, double min_distance, int count = 64);

}  // namespace nmp
