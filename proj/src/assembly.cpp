#include "nmp/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "nmp/error.hpp"
#include "nmp/parallel.hpp"
#include "nmp/spatial.hpp"

namespace nmp {

namespace {

constexpr std::size_t kRowChunk = 128;

// Neighbours of one query point sorted by index, with all three kernel levels.
struct Neighbours {
    std::vector<std::int32_t> raw_index, index;
    std::vector<double> raw_d2, d2, scratch, k0, k1, k2;
    std::vector<std::size_t> order;

    void fetch(const SpatialGrid& grid, const Vec3& x, const KernelFamily& kernel) {
        raw_index.clear();
        raw_d2.clear();
        grid.query(x, kernel.support_radius(), raw_index, raw_d2);
        const std::size_t n = raw_index.size();
        order.resize(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw_index[a] < raw_index[b]; });
        index.resize(n);
        d2.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            index[k] = raw_index[order[k]];
            d2[k] = raw_d2[order[k]];
        }
        scratch.resize(n);
        k0.resize(n);
        k1.resize(n);
        k2.resize(n);
        kernel.scaled_batch(d2, scratch, k0, k1, k2);
    }
    std::size_t size() const noexcept { return index.size(); }
};

using RowFn = std::function<void(std::size_t row, Neighbours& nb, std::vector<std::int32_t>& cols,
                                 std::vector<double>& vals)>;

// Builds a CSR matrix row by row in fixed chunks, so the result does not
// depend on the number of workers.
CsrMatrix build_rows(std::size_t rows, std::size_t cols, const RowFn& fn) {
    struct Chunk {
        std::vector<std::int64_t> counts;
        std::vector<std::int32_t> col;
        std::vector<double> val;
    };
    const std::size_t chunks = (rows + kRowChunk - 1) / kRowChunk;
    std::vector<Chunk> parts(chunks);
    parallel_for(rows, kRowChunk, [&](std::size_t begin, std::size_t end) {
        Chunk& part = parts[begin / kRowChunk];
        Neighbours nb;
        std::vector<std::int32_t> c;
        std::vector<double> v;
        for (std::size_t r = begin; r < end; ++r) {
            c.clear();
            v.clear();
            fn(r, nb, c, v);
            part.counts.push_back(static_cast<std::int64_t>(c.size()));
            part.col.insert(part.col.end(), c.begin(), c.end());
            part.val.insert(part.val.end(), v.begin(), v.end());
        }
    });
    CsrMatrix a;
    a.rows = rows;
    a.cols = cols;
    a.row_ptr.assign(1, 0);
    a.row_ptr.reserve(rows + 1);
    std::size_t total = 0;
    for (const auto& p : parts) total += p.val.size();
    a.col.reserve(total);
    a.val.reserve(total);
    for (auto& p : parts) {
        for (auto c : p.counts) a.row_ptr.push_back(a.row_ptr.back() + c);
        a.col.insert(a.col.end(), p.col.begin(), p.col.end());
        a.val.insert(a.val.end(), p.val.begin(), p.val.end());
        p = Chunk{};
    }
    return a;
}

std::vector<double> evaluate(const ScalarField& f, const std::vector<Vec3>& pts) {
    std::vector<double> out(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = f(pts[i]);
    return out;
}

void require_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DomainError(std::string(what) + " has length " + std::to_string(got) + ", expected "
                          + std::to_string(want));
    }
}

}  // namespace

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    require_size(x.size(), cols, "input vector");
    require_size(y.size(), rows, "output vector");
    const simd::CsrView v = view();
    parallel_for(rows, 1024, [&](std::size_t b, std::size_t e) { simd::spmv(v, x, y, b, e); });
}

CsrMatrix CsrMatrix::transpose() const {
    CsrMatrix t;
    t.rows = cols;
    t.cols = rows;
    t.row_ptr.assign(cols + 1, 0);
    for (auto c : col) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
    for (std::size_t r = 0; r < cols; ++r) t.row_ptr[r + 1] += t.row_ptr[r];
    t.col.resize(col.size());
    t.val.resize(val.size());
    std::vector<std::int64_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
    for (std::size_t r = 0; r < rows; ++r) {
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            const auto dst = next[static_cast<std::size_t>(col[k])]++;
            t.col[dst] = static_cast<std::int32_t>(r);
            t.val[dst] = val[k];
        }
    }
    return t;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (auto k = row_ptr[r]; k < row_ptr[r + 1]; ++k) m(static_cast<Eigen::Index>(r), col[k]) += val[k];
    }
    return m;
}

double CsrMatrix::at(std::size_t r, std::size_t c) const {
    const auto first = col.begin() + row_ptr[r];
    const auto last = col.begin() + row_ptr[r + 1];
    const auto it = std::lower_bound(first, last, static_cast<std::int32_t>(c));
    return (it != last && *it == static_cast<std::int32_t>(c)) ? val[static_cast<std::size_t>(it - col.begin())] : 0.0;
}

void DiscreteSystem::residual(std::span<const double> u, std::span<const double> v, std::span<double> r_interior,
                              std::span<double> r_boundary) const {
    require_size(u.size(), n(), "u");
    require_size(v.size(), m_b(), "v");
    require_size(r_interior.size(), n(), "interior residual");
    require_size(r_boundary.size(), m_b(), "boundary residual");
    std::vector<double> gv(n());
    L.multiply(u, r_interior);
    G.multiply(v, gv);
    for (std::size_t i = 0; i < n(); ++i) r_interior[i] = r_interior[i] - gv[i] - rhs_interior[i];
    D.multiply(u, r_boundary);
    for (std::size_t l = 0; l < m_b(); ++l) r_boundary[l] = r_boundary[l] + rtilde[l] * v[l] - rhs_boundary[l];
}

DiscreteSystem assemble(std::shared_ptr<const PointCloud> cloud_ptr, const KernelFamily& kernel,
                        const TestProblem& problem) {
    if (!cloud_ptr) throw ConfigError("no point cloud", "cloud");
    const PointCloud& cloud = *cloud_ptr;
    if (std::abs(cloud.delta - kernel.delta()) > 1e-12 * std::max(1.0, cloud.delta)) {
        throw ConfigError("cloud delta " + std::to_string(cloud.delta) + " does not match kernel delta "
                              + std::to_string(kernel.delta()),
                          "delta");
    }
    if (cloud.manifold != problem.manifold.name()) {
        throw ConfigError("problem " + problem.id + " is defined on " + problem.manifold.name() + ", cloud is "
                              + cloud.manifold,
                          "problem");
    }

    const std::size_t n = cloud.interior.size();
    const std::size_t mb = cloud.boundary.size();
    const double delta = kernel.delta();
    const double inv_d2 = 1.0 / (delta * delta);

    DiscreteSystem s;
    s.cloud = cloud_ptr;
    s.problem_id = problem.id;
    s.delta = delta;

    const std::vector<Vec3> p = cloud.interior_positions();
    const std::vector<Vec3> q = cloud.boundary_positions();
    s.areas.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.areas[i] = cloud.interior[i].area;
    s.lengths.resize(mb);
    for (std::size_t k = 0; k < mb; ++k) s.lengths[k] = cloud.boundary[k].length;
    const auto& A = s.areas;
    const auto& Lk = s.lengths;

    const std::vector<double> f_p = evaluate(problem.f, p);
    const std::vector<double> f_q = evaluate(problem.f, q);
    std::vector<double> g_q(mb, 0.0), lapg_q(mb, 0.0);
    if (!problem.homogeneous) {
        g_q = evaluate(problem.g, q);
        lapg_q = evaluate(problem.laplacian_boundary_g, q);
    }

    const SpatialGrid interior_index(p, kernel.support_radius());
    const SpatialGrid boundary_index(q, kernel.support_radius());

    s.f1.assign(n, 0.0);
    s.g1.assign(n, 0.0);
    s.f2.assign(mb, 0.0);
    s.g2.assign(mb, 0.0);
    s.rtilde.assign(mb, 0.0);
    std::vector<char> isolated(n, 0);

    // Interior-interior: L and the first sum of f1 (j = i included).
    s.L = build_rows(n, n, [&](std::size_t i, Neighbours& nb, auto& cols, auto& vals) {
        nb.fetch(interior_index, p[i], kernel);
        double diag = 0.0;
        double f1 = 0.0;
        std::size_t self = nb.size();
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const auto j = static_cast<std::size_t>(nb.index[k]);
            f1 += nb.k1[k] * f_p[j] * A[j];
            if (j == i) {
                self = cols.size();
                cols.push_back(static_cast<std::int32_t>(i));
                vals.push_back(0.0);
                continue;
            }
            const double w = nb.k0[k] * A[j] * inv_d2;
            cols.push_back(static_cast<std::int32_t>(j));
            vals.push_back(-w);
            diag += w;
        }
        if (self == nb.size()) {
            self = static_cast<std::size_t>(std::lower_bound(cols.begin(), cols.end(), static_cast<std::int32_t>(i)) - cols.begin());
            cols.insert(cols.begin() + static_cast<std::ptrdiff_t>(self), static_cast<std::int32_t>(i));
            vals.insert(vals.begin() + static_cast<std::ptrdiff_t>(self), 0.0);
        }
        vals[self] = diag;
        s.f1[i] = f1;
        if (nb.size() <= 1) isolated[i] = 1;
    });

    // Interior-boundary: G, the boundary sum of f1, and g1.
    s.G = build_rows(n, mb, [&](std::size_t i, Neighbours& nb, auto& cols, auto& vals) {
        nb.fetch(boundary_index, p[i], kernel);
        double f1 = 0.0;
        double g1 = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const auto b = static_cast<std::size_t>(nb.index[k]);
            const BoundarySample& qs = cloud.boundary[b];
            const double normal = (p[i] - qs.position).dot(qs.conormal);
            const double c = (2.0 + qs.kappa * normal) * nb.k1[k];
            cols.push_back(static_cast<std::int32_t>(b));
            vals.push_back(c * Lk[b]);
            f1 -= normal * nb.k1[k] * f_q[b] * Lk[b];
            g1 -= normal * nb.k1[k] * lapg_q[b] * Lk[b];
        }
        s.f1[i] += f1;
        if (!problem.homogeneous) s.g1[i] = g1;
    });

    // Boundary-interior: D, the interior part of Rtilde, f2 and g2.
    s.D = build_rows(mb, n, [&](std::size_t l, Neighbours& nb, auto& cols, auto& vals) {
        const BoundarySample& ql = cloud.boundary[l];
        nb.fetch(interior_index, ql.position, kernel);
        double rt = 0.0, f2 = 0.0, ptilde = 0.0;
        for (std::size_t k = 0; k < nb.size(); ++k) {
            const auto j = static_cast<std::size_t>(nb.index[k]);
            const double normal = -((ql.position - p[j]).dot(ql.conormal));
            const double c = (2.0 + ql.kappa * normal) * nb.k1[k];
            cols.push_back(static_cast<std::int32_t>(j));
            vals.push_back(c * A[j]);
            rt -= ql.kappa * normal * normal * nb.k1[k] * A[j];
            f2 += nb.k2[k] * f_p[j] * A[j];
            ptilde += c * A[j];
        }
        s.rtilde[l] = rt;
        s.f2[l] = -2.0 * delta * delta * f2;
        if (!problem.homogeneous) s.g2[l] = ptilde * g_q[l];
    });

    // Boundary-boundary: 4 delta^2 sum_k Rbarbar(q_l, q_k) L_k.
    parallel_for(mb, kRowChunk, [&](std::size_t begin, std::size_t end) {
        Neighbours nb;
        for (std::size_t l = begin; l < end; ++l) {
            nb.fetch(boundary_index, q[l], kernel);
            double sum = 0.0;
            for (std::size_t k = 0; k < nb.size(); ++k) sum += nb.k2[k] * Lk[static_cast<std::size_t>(nb.index[k])];
            s.rtilde[l] += 4.0 * delta * delta * sum;
        }
    });

    s.rhs_interior.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.rhs_interior[i] = s.f1[i] + s.g1[i];
    s.rhs_boundary.resize(mb);
    for (std::size_t l = 0; l < mb; ++l) s.rhs_boundary[l] = s.f2[l] + s.g2[l];

    s.isolated_points = static_cast<std::size_t>(std::count(isolated.begin(), isolated.end(), 1));
    if (s.isolated_points > 0) {
        s.warnings.push_back(std::to_string(s.isolated_points) + " interior point(s) have no neighbour within 2 delta");
    }
    for (std::size_t l = 0; l < mb; ++l) {
        if (s.D.row_ptr[l + 1] == s.D.row_ptr[l]) {
            s.warnings.push_back("boundary point " + std::to_string(l) + " has no interior neighbour within 2 delta");
        }
    }
    return s;
}

double discrete_energy(const DiscreteSystem& system, std::span<const double> u, std::span<const double> v) {
    require_size(u.size(), system.n(), "u");
    require_size(v.size(), system.m_b(), "v");
    // Off-diagonal L entries are -R_delta A_j / delta^2.
    const CsrMatrix& L = system.L;
    double interior = 0.0;
    for (std::size_t i = 0; i < system.n(); ++i) {
        double row = 0.0;
        for (auto k = L.row_ptr[i]; k < L.row_ptr[i + 1]; ++k) {
            const auto j = static_cast<std::size_t>(L.col[k]);
            if (j == i) continue;
            const double d = u[i] - u[j];
            row -= d * d * L.val[k];
        }
        interior += row * system.areas[i];
    }
    double boundary = 0.0;
    for (std::size_t l = 0; l < system.m_b(); ++l) boundary += system.rtilde[l] * v[l] * v[l] * system.lengths[l];
    return 0.5 * interior + boundary;
}

SchurSystem::SchurSystem(const DiscreteSystem& system) : system_(system), areas_(system.areas) {
    const std::size_t n = system.n();
    const std::size_t mb = system.m_b();
    for (std::size_t l = 0; l < mb; ++l) {
        if (!(system.rtilde[l] > 0.0)) {
            throw SingularReductionError("Rtilde at boundary point " + std::to_string(l) + " is "
                                         + std::to_string(system.rtilde[l]));
        }
    }
    w_ = system.G;
    for (std::size_t i = 0; i < n; ++i) {
        for (auto k = w_.row_ptr[i]; k < w_.row_ptr[i + 1]; ++k) w_.val[k] *= areas_[i];
    }
    wt_ = w_.transpose();
    inv_lr_.resize(mb);
    for (std::size_t l = 0; l < mb; ++l) inv_lr_[l] = 1.0 / (system.lengths[l] * system.rtilde[l]);

    diagonal_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = areas_[i] * system.L.at(i, i);
        for (auto k = w_.row_ptr[i]; k < w_.row_ptr[i + 1]; ++k) {
            d += w_.val[k] * w_.val[k] * inv_lr_[static_cast<std::size_t>(w_.col[k])];
        }
        diagonal_[i] = d;
    }

    std::vector<double> scaled(mb);
    for (std::size_t l = 0; l < mb; ++l) scaled[l] = system.rhs_boundary[l] / system.rtilde[l];
    rhs_.resize(n);
    w_.multiply(scaled, rhs_);
    for (std::size_t i = 0; i < n; ++i) rhs_[i] += areas_[i] * system.rhs_interior[i];
    boundary_scratch_.resize(mb);
}

void SchurSystem::apply(std::span<const double> x, std::span<double> y) const {
    system_.L.multiply(x, y);
    simd::multiply(areas_, y, y);
    wt_.multiply(x, boundary_scratch_);
    simd::multiply(inv_lr_, boundary_scratch_, boundary_scratch_);
    const simd::CsrView w = w_.view();
    // y += W s, row by row so the accumulation order is fixed.
    for (std::size_t i = 0; i < size(); ++i) {
        double acc = 0.0;
        for (auto k = w.row_ptr[i]; k < w.row_ptr[i + 1]; ++k) acc += w.val[k] * boundary_scratch_[w.col[k]];
        y[i] += acc;
    }
}

std::vector<double> SchurSystem::recover_boundary(std::span<const double> u) const {
    std::vector<double> v(system_.m_b());
    system_.D.multiply(u, v);
    for (std::size_t l = 0; l < v.size(); ++l) v[l] = (system_.rhs_boundary[l] - v[l]) / system_.rtilde[l];
    return v;
}

Eigen::MatrixXd SchurSystem::to_dense() const {
    const Eigen::MatrixXd W = w_.to_dense();
    const Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(inv_lr_.data(), static_cast<Eigen::Index>(inv_lr_.size()));
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(areas_.data(), static_cast<Eigen::Index>(areas_.size()));
    Eigen::MatrixXd S = a.asDiagonal() * system_.L.to_dense();
    S.noalias() += W * d.asDiagonal() * W.transpose();
    return S;
}

SchurSystem schur_reduce(const DiscreteSystem& system) { return SchurSystem(system); }

void write_matrix_market(std::ostream& os, const CsrMatrix& a) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << a.rows << ' ' << a.cols << ' ' << a.nnz() << '\n';
    os << std::setprecision(17);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (auto k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) os << r + 1 << ' ' << a.col[k] + 1 << ' ' << a.val[k] << '\n';
    }
}

namespace {

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& fn) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path.string() + " for writing", path.string());
    fn(os);
    if (!os) throw IoError("write failed for " + path.string(), path.string());
}

void write_vector_csv(std::ostream& os, const char* name, const std::vector<double>& v) {
    os << "index," << name << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < v.size(); ++i) os << i << ',' << v[i] << '\n';
}

}  // namespace

void export_system(const DiscreteSystem& system, const std::string& directory, const std::string& config_json) {
    namespace fs = std::filesystem;
    const fs::path dir(directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + directory + ": " + ec.message(), directory);

    write_file(dir / "L.mtx", [&](std::ostream& os) { write_matrix_market(os, system.L); });
    write_file(dir / "G.mtx", [&](std::ostream& os) { write_matrix_market(os, system.G); });
    write_file(dir / "D.mtx", [&](std::ostream& os) { write_matrix_market(os, system.D); });
    CsrMatrix rt;
    rt.rows = rt.cols = system.m_b();
    rt.row_ptr.resize(system.m_b() + 1);
    for (std::size_t l = 0; l < system.m_b(); ++l) {
        rt.row_ptr[l + 1] = static_cast<std::int64_t>(l + 1);
        rt.col.push_back(static_cast<std::int32_t>(l));
        rt.val.push_back(system.rtilde[l]);
    }
    write_file(dir / "Rtilde.mtx", [&](std::ostream& os) { write_matrix_market(os, rt); });
    write_file(dir / "rhs_interior.csv", [&](std::ostream& os) { write_vector_csv(os, "rhs", system.rhs_interior); });
    write_file(dir / "rhs_boundary.csv", [&](std::ostream& os) { write_vector_csv(os, "rhs", system.rhs_boundary); });

    nlohmann::json manifest = {
        {"problem", system.problem_id},
        {"delta", system.delta},
        {"n", system.n()},
        {"m_b", system.m_b()},
        {"blocks",
         {{"L", {{"file", "L.mtx"}, {"rows", system.L.rows}, {"cols", system.L.cols}, {"nnz", system.L.nnz()}}},
          {"G", {{"file", "G.mtx"}, {"rows", system.G.rows}, {"cols", system.G.cols}, {"nnz", system.G.nnz()}}},
          {"D", {{"file", "D.mtx"}, {"rows", system.D.rows}, {"cols", system.D.cols}, {"nnz", system.D.nnz()}}},
          {"Rtilde", {{"file", "Rtilde.mtx"}, {"rows", system.m_b()}, {"cols", system.m_b()}, {"nnz", system.m_b()}}}}},
        {"rhs_interior", "rhs_interior.csv"},
        {"rhs_boundary", "rhs_boundary.csv"},
        {"isolated_points", system.isolated_points},
        {"warnings", system.warnings},
        {"config", nlohmann::json::parse(config_json.empty() ? "{}" : config_json)},
    };
    write_file(dir / "manifest.json", [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
}

}  // namespace nmp
