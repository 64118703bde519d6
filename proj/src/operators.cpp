#include "nmp/operators.hpp"

#include <cmath>
#include <numbers>

#include "nmp/error.hpp"

namespace nmp {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kOnManifoldTol = 1e-8;
}  // namespace

QuadratureGrid::QuadratureGrid(const ParametricManifold& m, int res) : manifold(m), resolution(res) {
    if (res < 4) throw ConfigError("quadrature resolution must be at least 4", "resolution");
    const auto nu = static_cast<std::size_t>(std::ceil(res * kTwoPi));
    const auto nv = static_cast<std::size_t>(std::ceil(res * (m.v_max() - m.v_min())));
    const double du = kTwoPi / static_cast<double>(nu);
    const double dv = (m.v_max() - m.v_min()) / static_cast<double>(nv);
    interior_nodes.reserve(nu * nv);
    interior_weights.reserve(nu * nv);
    for (std::size_t j = 0; j < nv; ++j) {
        const double v = m.v_min() + (static_cast<double>(j) + 0.5) * dv;
        for (std::size_t i = 0; i < nu; ++i) {
            const double u = (static_cast<double>(i) + 0.5) * du;
            interior_nodes.push_back(m.point(u, v));
            interior_weights.push_back(m.area_element(u, v) * du * dv);
        }
    }
    for (std::size_t i = 0; i < nu; ++i) {
        const BoundaryPoint b = m.boundary_point((static_cast<double>(i) + 0.5) * du);
        boundary_nodes.push_back(b.position);
        boundary_weights.push_back(b.length_element * du);
        boundary_conormals.push_back(b.conormal);
        boundary_kappa.push_back(b.kappa_n);
    }
}

double QuadratureGrid::total_area() const {
    double s = 0.0;
    for (double w : interior_weights) s += w;
    return s;
}

double QuadratureGrid::total_length() const {
    double s = 0.0;
    for (double w : boundary_weights) s += w;
    return s;
}

const char* to_string(OperatorKind k) noexcept {
    switch (k) {
        case OperatorKind::L: return "L";
        case OperatorKind::G: return "G";
        case OperatorKind::D: return "D";
        case OperatorKind::P: return "P";
        case OperatorKind::Q: return "Q";
        case OperatorKind::S: return "S";
        case OperatorKind::Rtilde: return "Rtilde";
        case OperatorKind::Ptilde: return "Ptilde";
    }
    return "?";
}

NonlocalOperators::NonlocalOperators(const QuadratureGrid& grid, KernelFamily kernel)
    : grid_(grid),
      kernel_(std::move(kernel)),
      interior_index_(grid.interior_nodes, kernel_.support_radius()),
      boundary_index_(grid.boundary_nodes, kernel_.support_radius()) {}

void NonlocalOperators::gather(const SpatialGrid& index, const Vec3& x, Neighbourhood& nb) const {
    nb.index.clear();
    nb.sqdist.clear();
    index.query(x, kernel_.support_radius(), nb.index, nb.sqdist);
    const std::size_t n = nb.index.size();
    nb.scratch.resize(n);
    nb.k0.resize(n);
    nb.k1.resize(n);
    nb.k2.resize(n);
    kernel_.scaled_batch(nb.sqdist, nb.scratch, nb.k0, nb.k1, nb.k2);
}

void NonlocalOperators::require(OperatorKind which, const EvalPoint& x) const {
    const bool boundary_op = which == OperatorKind::D || which == OperatorKind::Q
                             || which == OperatorKind::Rtilde || which == OperatorKind::Ptilde;
    const ParametricManifold& m = grid_.manifold;
    if (boundary_op) {
        if (!x.on_boundary || !m.on_boundary(x.position, kOnManifoldTol)) {
            throw DomainError(std::string("operator ") + to_string(which) + " needs a boundary evaluation point");
        }
    } else if (!m.contains(x.position, kOnManifoldTol)) {
        throw DomainError(std::string("operator ") + to_string(which) + " needs a point on the manifold");
    }
}

double NonlocalOperators::apply(OperatorKind which, const EvalPoint& x, const ScalarField& field) const {
    require(which, x);
    if (which != OperatorKind::Rtilde && which != OperatorKind::Ptilde && !field) {
        throw DomainError(std::string("operator ") + to_string(which) + " needs an input field");
    }
    const double delta = kernel_.delta();
    const Vec3& p = x.position;
    Neighbourhood nb;
    double sum = 0.0;

    auto over_interior = [&](auto&& term) {
        gather(interior_index_, p, nb);
        for (std::size_t k = 0; k < nb.index.size(); ++k) {
            const auto j = static_cast<std::size_t>(nb.index[k]);
            sum += term(grid_.interior_nodes[j], k) * grid_.interior_weights[j];
        }
    };
    auto over_boundary = [&](auto&& term) {
        gather(boundary_index_, p, nb);
        for (std::size_t k = 0; k < nb.index.size(); ++k) {
            const auto j = static_cast<std::size_t>(nb.index[k]);
            sum += term(j, k) * grid_.boundary_weights[j];
        }
    };

    switch (which) {
        case OperatorKind::L: {
            const double ux = field(p);
            over_interior([&](const Vec3& y, std::size_t k) { return (ux - field(y)) * nb.k0[k]; });
            return sum / (delta * delta);
        }
        case OperatorKind::G:
            over_boundary([&](std::size_t j, std::size_t k) {
                const Vec3& y = grid_.boundary_nodes[j];
                const double shape = 2.0 + grid_.boundary_kappa[j] * (p - y).dot(grid_.boundary_conormals[j]);
                return field(y) * shape * nb.k1[k];
            });
            return sum;
        case OperatorKind::D:
            over_interior([&](const Vec3& y, std::size_t k) {
                return field(y) * (2.0 - x.kappa_n * (p - y).dot(x.conormal)) * nb.k1[k];
            });
            return sum;
        case OperatorKind::P:
            over_interior([&](const Vec3& y, std::size_t k) { return field(y) * nb.k1[k]; });
            over_boundary([&](std::size_t j, std::size_t k) {
                const Vec3& y = grid_.boundary_nodes[j];
                return -(p - y).dot(grid_.boundary_conormals[j]) * field(y) * nb.k1[k];
            });
            return sum;
        case OperatorKind::Q:
            over_interior([&](const Vec3& y, std::size_t k) { return field(y) * nb.k2[k]; });
            return -2.0 * delta * delta * sum;
        case OperatorKind::S:
            over_boundary([&](std::size_t j, std::size_t k) {
                const Vec3& y = grid_.boundary_nodes[j];
                return -(p - y).dot(grid_.boundary_conormals[j]) * field(y) * nb.k1[k];
            });
            return sum;
        case OperatorKind::Rtilde: {
            over_interior([&](const Vec3& y, std::size_t k) {
                const double s = (p - y).dot(x.conormal);
                return -x.kappa_n * s * s * nb.k1[k];
            });
            return sum + boundary_barbar_integral(x);
        }
        case OperatorKind::Ptilde:
            over_interior([&](const Vec3& y, std::size_t k) {
                return (2.0 - x.kappa_n * (p - y).dot(x.conormal)) * nb.k1[k];
            });
            return sum;
    }
    throw DomainError("unknown operator");
}

double NonlocalOperators::boundary_barbar_integral(const EvalPoint& x) const {
    Neighbourhood nb;
    gather(boundary_index_, x.position, nb);
    double sum = 0.0;
    for (std::size_t k = 0; k < nb.index.size(); ++k) {
        sum += nb.k2[k] * grid_.boundary_weights[static_cast<std::size_t>(nb.index[k])];
    }
    const double delta = kernel_.delta();
    return 4.0 * delta * delta * sum;
}

double NonlocalOperators::truncation_interior(const TestProblem& problem, const EvalPoint& x) const {
    double r = apply(OperatorKind::L, x, problem.u_exact) - apply(OperatorKind::G, x, problem.du_dn_exact)
               - apply(OperatorKind::P, x, problem.f);
    if (!problem.homogeneous) r -= apply(OperatorKind::S, x, problem.laplacian_boundary_g);
    return r;
}

double NonlocalOperators::truncation_boundary(const TestProblem& problem, const EvalPoint& x) const {
    double r = apply(OperatorKind::D, x, problem.u_exact)
               + apply(OperatorKind::Rtilde, x) * problem.du_dn_exact(x.position)
               - apply(OperatorKind::Q, x, problem.f);
    if (!problem.homogeneous) r -= apply(OperatorKind::Ptilde, x) * problem.g(x.position);
    return r;
}

NonlocalOperators::Adjointness NonlocalOperators::adjointness(const ScalarField& w, const ScalarField& s) const {
    Adjointness out{0.0, 0.0, 0.0, 0.0};
    // Interior side: G s at every interior node, then integrate against w.
    Neighbourhood nb;
    for (std::size_t i = 0; i < grid_.interior_nodes.size(); ++i) {
        const Vec3& p = grid_.interior_nodes[i];
        const double wi = w(p);
        out.w_norm += wi * wi * grid_.interior_weights[i];
        gather(boundary_index_, p, nb);
        if (nb.index.empty()) continue;
        double gs = 0.0;
        for (std::size_t k = 0; k < nb.index.size(); ++k) {
            const auto j = static_cast<std::size_t>(nb.index[k]);
            const Vec3& y = grid_.boundary_nodes[j];
            const double shape = 2.0 + grid_.boundary_kappa[j] * (p - y).dot(grid_.boundary_conormals[j]);
            gs += s(y) * shape * nb.k1[k] * grid_.boundary_weights[j];
        }
        out.interior_side += wi * gs * grid_.interior_weights[i];
    }
    for (std::size_t j = 0; j < grid_.boundary_nodes.size(); ++j) {
        const EvalPoint x{grid_.boundary_nodes[j], true, grid_.boundary_conormals[j], grid_.boundary_kappa[j]};
        const double sj = s(x.position);
        out.s_norm += sj * sj * grid_.boundary_weights[j];
        out.boundary_side += sj * apply(OperatorKind::D, x, w) * grid_.boundary_weights[j];
    }
    out.w_norm = std::sqrt(out.w_norm);
    out.s_norm = std::sqrt(out.s_norm);
    return out;
}

std::vector<Vec3> interior_probe_points(const ParametricManifold& m, double min_distance, int count) {
    const double v_cut = m.v_max() - min_distance;
    if (v_cut <= m.v_min()) throw ConfigError("no interior region that far from the boundary", "min_distance");
    // Largest s with area-uniform v(s) <= v_cut, by bisection (v is increasing in s).
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (m.area_uniform_parameters(mid, 0.0).y() <= v_cut ? lo : hi) = mid;
    }
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    std::vector<Vec3> out;
    for (int i = 0; i < count; ++i) {
        const double s = lo * (i + 0.5) / count;
        const double t = std::fmod(i * golden, kTwoPi) / kTwoPi;
        const Eigen::Vector2d uv = m.area_uniform_parameters(s, t);
        out.push_back(m.point(uv.x(), uv.y()));
    }
    return out;
}

namespace {

struct PointResiduals {
    std::vector<double> interior, boundary, boundary_weights;
};

PointResiduals point_residuals(const TestProblem& problem, const QuadratureGrid& grid, double delta,
                               const std::vector<Vec3>& interior_probes, int boundary_probes) {
    const NonlocalOperators ops(grid, KernelFamily::cosine(delta));
    PointResiduals out;
    for (const auto& x : interior_probes) out.interior.push_back(ops.truncation_interior(problem, EvalPoint::interior(x)));
    const ParametricManifold& m = problem.manifold;
    for (int k = 0; k < boundary_probes; ++k) {
        const BoundaryPoint b = m.boundary_point(kTwoPi * (k + 0.5) / boundary_probes);
        out.boundary.push_back(ops.truncation_boundary(problem, EvalPoint::boundary(b)));
        out.boundary_weights.push_back(b.length_element * kTwoPi / boundary_probes);
    }
    return out;
}

TruncationSample norms(double delta, const PointResiduals& r) {
    TruncationSample out{delta, 0.0, 0.0};
    for (double v : r.interior) out.interior_rms += v * v;
    out.interior_rms = r.interior.empty() ? 0.0 : std::sqrt(out.interior_rms / static_cast<double>(r.interior.size()));
    for (std::size_t k = 0; k < r.boundary.size(); ++k) out.boundary_l2 += r.boundary[k] * r.boundary[k] * r.boundary_weights[k];
    out.boundary_l2 = std::sqrt(out.boundary_l2);
    return out;
}

}  // namespace

TruncationSample probe_truncation(const TestProblem& problem, const QuadratureGrid& grid, double delta,
                                  const std::vector<Vec3>& interior_probes, int boundary_probes) {
    return norms(delta, point_residuals(problem, grid, delta, interior_probes, boundary_probes));
}

TruncationSample probe_truncation(const TestProblem& problem, const QuadratureGrid& coarse,
                                  const QuadratureGrid& fine, double delta,
                                  const std::vector<Vec3>& interior_probes, int boundary_probes) {
    if (fine.resolution != 2 * coarse.resolution) {
        throw ConfigError("Richardson step needs the fine grid at twice the coarse resolution", "resolution");
    }
    PointResiduals c = point_residuals(problem, coarse, delta, interior_probes, boundary_probes);
    const PointResiduals f = point_residuals(problem, fine, delta, interior_probes, boundary_probes);
    for (std::size_t i = 0; i < c.interior.size(); ++i) c.interior[i] = (4.0 * f.interior[i] - c.interior[i]) / 3.0;
    for (std::size_t k = 0; k < c.boundary.size(); ++k) c.boundary[k] = (4.0 * f.boundary[k] - c.boundary[k]) / 3.0;
    return norms(delta, c);
}

}  // namespace nmp
