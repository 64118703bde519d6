#pragma once

// Discrete coupled system on a point cloud:
//
//   sum_j L^ij (u_i - u_j) - sum_k G^ik v_k = f1_i + g1_i     (interior p_i)
//   sum_j D^lj u_j + Rtilde^l v_l           = f2_l + g2_l     (boundary q_l)
//
// and its symmetric Schur complement in u.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nmp/geometry.hpp"
#include "nmp/kernels.hpp"
#include "nmp/problems.hpp"
#include "nmp/simd.hpp"

namespace nmp {

struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::int64_t> row_ptr{0};
    std::vector<std::int32_t> col;
    std::vector<double> val;

    std::size_t nnz() const noexcept { return val.size(); }
    simd::CsrView view() const noexcept { return {row_ptr, col, val}; }

    /// y = A x, row-parallel.
    void multiply(std::span<const double> x, std::span<double> y) const;

    CsrMatrix transpose() const;
    Eigen::MatrixXd to_dense() const;

    /// Entry lookup by binary search in the row (columns are sorted); 0 when absent.
    double at(std::size_t r, std::size_t c) const;
};

struct DiscreteSystem {
    std::shared_ptr<const PointCloud> cloud;
    std::string problem_id;
    double delta = 0.0;

    CsrMatrix L;  // graph Laplacian: diagonal sum_{j!=i} L^ij, off-diagonal -L^ij
    CsrMatrix G;  // n x m_b
    CsrMatrix D;  // m_b x n
    std::vector<double> rtilde;

    std::vector<double> f1, g1, f2, g2;
    std::vector<double> rhs_interior;  // f1 + g1
    std::vector<double> rhs_boundary;  // f2 + g2

    std::vector<double> areas;    // A_i
    std::vector<double> lengths;  // L_k

    std::vector<std::string> warnings;
    std::size_t isolated_points = 0;

    std::size_t n() const noexcept { return areas.size(); }
    std::size_t m_b() const noexcept { return lengths.size(); }

    /// Residuals of both block equations for (u, v).
    void residual(std::span<const double> u, std::span<const double> v, std::span<double> r_interior,
                  std::span<double> r_boundary) const;
};

/// ConfigError when cloud.delta differs from kernel.delta().
DiscreteSystem assemble(std::shared_ptr<const PointCloud> cloud, const KernelFamily& kernel,
                        const TestProblem& problem);

/// (1 / 2 delta^2) sum_ij (u_i - u_j)^2 R_delta(p_i, p_j) A_i A_j + sum_l Rtilde^l v_l^2 L_l
double discrete_energy(const DiscreteSystem& system, std::span<const double> u, std::span<const double> v);

/// S = D_A L + W diag(1 / (L_k Rtilde_k)) W^T with W = D_A G, applied matrix-free.
class SchurSystem {
public:
    explicit SchurSystem(const DiscreteSystem& system);

    std::size_t size() const noexcept { return areas_.size(); }

    void apply(std::span<const double> x, std::span<double> y) const;
    const std::vector<double>& diagonal() const noexcept { return diagonal_; }
    const std::vector<double>& rhs() const noexcept { return rhs_; }

    /// v = (rhs_boundary - D u) / Rtilde
    std::vector<double> recover_boundary(std::span<const double> u) const;

    Eigen::MatrixXd to_dense() const;

    const CsrMatrix& coupling() const noexcept { return w_; }

private:
    const DiscreteSystem& system_;
    std::vector<double> areas_;
    CsrMatrix w_;   // n x m_b
    CsrMatrix wt_;  // m_b x n
    std::vector<double> inv_lr_;
    std::vector<double> diagonal_;
    std::vector<double> rhs_;
    mutable std::vector<double> boundary_scratch_;
};

/// SingularReductionError when any Rtilde entry is not positive.
SchurSystem schur_reduce(const DiscreteSystem& system);

void write_matrix_market(std::ostream& os, const CsrMatrix& a);

/// L.mtx, G.mtx, D.mtx, Rtilde.mtx, rhs_interior.csv, rhs_boundary.csv and
/// manifest.json in `directory`. `config` is embedded in the manifest.
void export_system(const DiscreteSystem& system, const std::string& directory, const std::string& config_json);

}  // namespace nmp
