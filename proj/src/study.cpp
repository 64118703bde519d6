#include "nmp/study.hpp"

#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "nmp/assembly.hpp"
#include "nmp/error.hpp"

namespace nmp {

double error_interior(std::span<const double> u, const TestProblem& problem, const PointCloud& cloud) {
    if (u.size() != cloud.interior.size()) throw MetricError("solution length does not match the cloud");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double exact = problem.u_exact(cloud.interior[j].position);
        const double a = cloud.interior[j].area;
        num += (u[j] - exact) * (u[j] - exact) * a;
        den += exact * exact * a;
    }
    if (!(den > 0.0)) throw MetricError("exact solution vanishes on the cloud; relative error undefined");
    return std::sqrt(num / den);
}

BoundaryError error_boundary(std::span<const double> v, const TestProblem& problem, const PointCloud& cloud) {
    if (v.size() != cloud.boundary.size()) throw MetricError("flux length does not match the cloud");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double exact = problem.du_dn_exact(cloud.boundary[k].position);
        const double l = cloud.boundary[k].length;
        num += (v[k] - exact) * (v[k] - exact) * l;
        den += exact * exact * l;
    }
    if (std::sqrt(den) < 1e-12) return {std::sqrt(num), true};
    return {std::sqrt(num / den), false};
}

double successive_rate(double e_prev, double e_next, double delta_prev, double delta_next) {
    if (!(e_prev > 0.0) || !(e_next > 0.0) || !(delta_prev > 0.0) || !(delta_next > 0.0)) {
        throw MetricError("successive_rate needs positive errors and deltas");
    }
    if (delta_prev == delta_next) throw MetricError("successive_rate needs distinct deltas");
    return std::log(e_prev / e_next) / std::log(delta_prev / delta_next);
}

LineFit fit_log_log(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw MetricError("log-log fit needs at least two pairs");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw MetricError("log-log fit needs positive data");
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double m = static_cast<double>(x.size());
    const double den = m * sxx - sx * sx;
    if (den == 0.0) throw MetricError("log-log fit needs distinct abscissae");
    const double slope = (m * sxy - sx * sy) / den;
    return {slope, (sy - slope * sx) / m};
}

std::vector<std::size_t> standard_n_list() {
    std::vector<std::size_t> out;
    for (std::size_t j = 4; j <= 11; ++j) out.push_back(2 * j * j * j * j);
    return out;
}

void StudyConfig::validate() const {
    if (manifold != "hemisphere" && manifold != "disk") throw ConfigError("unknown manifold '" + manifold + "'", "manifold");
    make_problem(manifold, problem);
    if (n_list.size() < 3) throw ConfigError("a study needs at least three cloud sizes", "n_list");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 16) throw ConfigError("cloud sizes must be at least 16", "n_list");
        if (i > 0 && n_list[i] <= n_list[i - 1]) throw ConfigError("n_list must be strictly increasing", "n_list");
    }
    if (!m_b_list.empty() && m_b_list.size() != n_list.size()) {
        throw ConfigError("m_b_list must match n_list in length", "m_b_list");
    }
    if (!delta_list.empty()) {
        if (delta_list.size() != n_list.size()) throw ConfigError("delta_list must match n_list in length", "delta_list");
        for (double d : delta_list) {
            if (!(d > 0.0) || !std::isfinite(d)) throw ConfigError("delta values must be positive", "delta_list");
        }
    }
    if (!(tol > 0.0) || tol >= 1.0) throw ConfigError("tol must lie in (0, 1)", "tol");
}

nlohmann::json StudyConfig::to_json() const {
    return {
        {"manifold", manifold},
        {"problem", problem},
        {"n_list", n_list},
        {"m_b_list", m_b_list},
        {"delta_rule", delta_list.empty() ? nlohmann::json("(2/n)^(1/4)") : nlohmann::json(delta_list)},
        {"seed", seed},
        {"mode", to_string(mode)},
        {"weight_mode", to_string(weights)},
        {"tol", tol},
        {"max_iter", max_iter},
    };
}

StudyResult run_study(const StudyConfig& config, const std::function<void(const ConvergenceRecord&)>& on_record) {
    config.validate();
    const TestProblem problem = make_problem(config.manifold, config.problem);

    StudyResult result;
    result.config = config;
    for (std::size_t row = 0; row < config.n_list.size(); ++row) {
        SamplingOptions opts;
        opts.n = config.n_list[row];
        opts.m_b = config.m_b_list.empty() ? default_boundary_count(opts.n) : config.m_b_list[row];
        opts.seed = config.seed;
        opts.mode = config.mode;
        opts.weights = config.weights;
        if (!config.delta_list.empty()) opts.delta = config.delta_list[row];
        auto cloud = std::make_shared<const PointCloud>(sample_manifold(problem.manifold, opts));

        const DiscreteSystem system = assemble(cloud, KernelFamily::cosine(cloud->delta), problem);
        SolveOptions so;
        so.tol = config.tol;
        so.max_iter = config.max_iter;
        const SolveResult sol = solve(system, so);

        ConvergenceRecord rec;
        rec.n = opts.n;
        rec.m_b = opts.m_b;
        rec.delta = cloud->delta;
        rec.seed = config.seed;
        rec.e2 = error_interior(sol.u, problem, *cloud);
        const BoundaryError eb = error_boundary(sol.v, problem, *cloud);
        rec.e2b = eb.value;
        rec.e2b_absolute = eb.absolute;
        rec.iterations = sol.iterations;
        rec.solve_seconds = sol.wall_time;
        rec.isolated_points = system.isolated_points;
        if (!result.records.empty()) {
            const ConvergenceRecord& prev = result.records.back();
            rec.rate = successive_rate(prev.e2, rec.e2, prev.delta, rec.delta);
            if (prev.e2b > 0.0 && rec.e2b > 0.0) rec.rate_b = successive_rate(prev.e2b, rec.e2b, prev.delta, rec.delta);
        }
        result.records.push_back(rec);
        if (on_record) on_record(rec);
    }

    std::vector<double> d, e, eb;
    for (const auto& r : result.records) {
        d.push_back(r.delta);
        e.push_back(r.e2);
        eb.push_back(r.e2b);
    }
    result.interior_fit = fit_log_log(d, e);
    result.boundary_fit = fit_log_log(d, eb);
    return result;
}

void write_study_csv(std::ostream& os, const StudyResult& result) {
    os << "# config " << result.config.to_json().dump() << '\n';
    bool absolute = false;
    for (const auto& r : result.records) absolute = absolute || r.e2b_absolute;
    if (absolute) os << "# e2b is the absolute L2 error: the exact boundary flux vanishes\n";
    os << "n,m_b,delta,e2,rate,e2b,rate_b,seed\n";
    auto opt = [](const std::optional<double>& x) {
        if (!x) return std::string("N/A");
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << *x;
        return s.str();
    };
    for (const auto& r : result.records) {
        std::ostringstream line;
        line << r.n << ',' << r.m_b << ',' << std::fixed << std::setprecision(6) << r.delta << ','
             << std::scientific << std::setprecision(6) << r.e2 << ',' << opt(r.rate) << ',' << std::scientific
             << std::setprecision(6) << r.e2b << ',' << opt(r.rate_b) << ',' << r.seed;
        os << line.str() << '\n';
    }
}

nlohmann::json study_summary(const StudyResult& result) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : result.records) {
        rows.push_back({{"n", r.n},
                        {"m_b", r.m_b},
                        {"delta", r.delta},
                        {"e2", r.e2},
                        {"e2b", r.e2b},
                        {"e2b_absolute", r.e2b_absolute},
                        {"iterations", r.iterations},
                        {"solve_seconds", r.solve_seconds},
                        {"isolated_points", r.isolated_points}});
    }
    return {
        {"slope_interior", result.interior_fit.slope},
        {"slope_boundary", result.boundary_fit.slope},
        {"intercepts", {{"interior", result.interior_fit.intercept}, {"boundary", result.boundary_fit.intercept}}},
        {"config", result.config.to_json()},
        {"rows", rows},
    };
}

}  // namespace nmp
