#include "nmp/solver.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "nmp/error.hpp"
#include "nmp/simd.hpp"

namespace nmp {

namespace {

double norm(std::span<const double> x) { return std::sqrt(simd::dot(x, x)); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

SolveResult solve(const DiscreteSystem& system, const SolveOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const SchurSystem S = schur_reduce(system);
    const std::size_t n = S.size();
    const std::size_t max_iter = options.max_iter ? options.max_iter : 10 * n;

    SolveResult out;
    out.u.assign(n, 0.0);
    const std::vector<double>& b = S.rhs();
    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        out.v = S.recover_boundary(out.u);
        out.history.push_back(0.0);
        out.wall_time = seconds_since(t0);
        return out;
    }

    std::vector<double> inv_diag(n);
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / S.diagonal()[i];

    std::vector<double> r(b), z(n), p(n), q(n);
    simd::multiply(inv_diag, r, z);
    p = z;
    double rz = simd::dot(r, z);
    double rel = 1.0;
    out.history.push_back(rel);
    std::size_t it = 0;
    while (rel > options.tol) {
        if (it >= max_iter) {
            throw NonConvergenceError("CG did not reach " + std::to_string(options.tol) + " in "
                                          + std::to_string(max_iter) + " iterations (residual "
                                          + std::to_string(rel) + ")",
                                      out.history);
        }
        S.apply(p, q);
        const double pq = simd::dot(p, q);
        if (!(pq > 0.0)) {
            throw NonConvergenceError("Schur complement is not positive definite along a search direction",
                                      out.history);
        }
        const double alpha = rz / pq;
        simd::axpy(alpha, p, out.u);
        simd::axpy(-alpha, q, r);
        simd::multiply(inv_diag, r, z);
        const double rz_next = simd::dot(r, z);
        simd::xpby(z, rz_next / rz, p);
        rz = rz_next;
        ++it;
        rel = norm(r) / bnorm;
        out.history.push_back(rel);
        if (options.on_iteration) options.on_iteration(it, rel, out.u);
    }
    out.iterations = it;
    out.residual = rel;
    out.v = S.recover_boundary(out.u);
    out.wall_time = seconds_since(t0);
    return out;
}

SolveResult dense_solve(const DiscreteSystem& system) {
    const auto t0 = std::chrono::steady_clock::now();
    const SchurSystem S = schur_reduce(system);
    const Eigen::MatrixXd A = S.to_dense();
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw SingularReductionError("Schur complement is not positive definite");
    const Eigen::Map<const Eigen::VectorXd> b(S.rhs().data(), static_cast<Eigen::Index>(S.size()));
    const Eigen::VectorXd x = llt.solve(b);

    SolveResult out;
    out.u.assign(x.data(), x.data() + x.size());
    const double bnorm = b.norm();
    out.residual = bnorm > 0.0 ? (A * x - b).norm() / bnorm : 0.0;
    out.v = S.recover_boundary(out.u);
    out.wall_time = seconds_since(t0);
    return out;
}

BlockResidual block_residual(const DiscreteSystem& system, const SolveResult& result) {
    std::vector<double> ri(system.n()), rb(system.m_b());
    system.residual(result.u, result.v, ri, rb);
    auto scale = [](const std::vector<double>& rhs, double floor) { return std::max(norm(rhs), floor); };
    std::vector<double> lu(system.n()), du(system.m_b());
    system.L.multiply(result.u, lu);
    system.D.multiply(result.u, du);
    return {norm(ri) / scale(system.rhs_interior, norm(lu)), norm(rb) / scale(system.rhs_boundary, norm(du))};
}

void write_solution_csv(std::ostream& os, const DiscreteSystem& system, const SolveResult& result) {
    const PointCloud& cloud = *system.cloud;
    os << "kind,x,y,z,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < cloud.interior.size(); ++i) {
        const Vec3& x = cloud.interior[i].position;
        os << "interior," << x.x() << ',' << x.y() << ',' << x.z() << ',' << result.u[i] << '\n';
    }
    for (std::size_t l = 0; l < cloud.boundary.size(); ++l) {
        const Vec3& x = cloud.boundary[l].position;
        os << "boundary," << x.x() << ',' << x.y() << ',' << x.z() << ',' << result.v[l] << '\n';
    }
}

}  // namespace nmp
