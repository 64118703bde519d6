#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nmp/geometry.hpp"
#include "nmp/problems.hpp"
#include "nmp/solver.hpp"

namespace nmp {

/// sqrt(sum (u_j - u(p_j))^2 A_j / sum u(p_j)^2 A_j). MetricError on a zero denominator.
double error_interior(std::span<const double> u, const TestProblem& problem, const PointCloud& cloud);

struct BoundaryError {
    double value;
    bool absolute;  // exact flux vanishes on the cloud; value is the absolute L2 error
};

/// Relative L2(dM) error of v against du/dn with L_k weights, absolute when
/// the exact flux norm is below 1e-12.
BoundaryError error_boundary(std::span<const double> v, const TestProblem& problem, const PointCloud& cloud);

/// log(e_prev / e_next) / log(delta_prev / delta_next)
double successive_rate(double e_prev, double e_next, double delta_prev, double delta_next);

struct LineFit {
    double slope;
    double intercept;  // natural log
};

/// Least-squares line through (log x, log y).
LineFit fit_log_log(std::span<const double> x, std::span<const double> y);

struct ConvergenceRecord {
    std::size_t n = 0;
    std::size_t m_b = 0;
    double delta = 0.0;
    double e2 = 0.0;
    std::optional<double> rate;
    double e2b = 0.0;
    std::optional<double> rate_b;
    std::uint64_t seed = 0;

    bool e2b_absolute = false;
    std::size_t iterations = 0;
    double solve_seconds = 0.0;
    std::size_t isolated_points = 0;
};

struct StudyConfig {
    std::string manifold = "hemisphere";
    std::string problem = "z2";
    std::vector<std::size_t> n_list;
    std::vector<std::size_t> m_b_list;  // empty: round(sqrt(8 n))
    std::vector<double> delta_list;     // empty: (2 / n)^(1/4)
    std::uint64_t seed = 0;
    SamplingMode mode = SamplingMode::Random;
    WeightMode weights = WeightMode::Auto;
    double tol = 1e-10;
    std::size_t max_iter = 0;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    nlohmann::json to_json() const;
};

/// The eight cloud sizes n = 2 j^4, j = 4..11.
std::vector<std::size_t> standard_n_list();

struct StudyResult {
    StudyConfig config;
    std::vector<ConvergenceRecord> records;
    LineFit interior_fit;
    LineFit boundary_fit;
};

StudyResult run_study(const StudyConfig& config,
                      const std::function<void(const ConvergenceRecord&)>& on_record = {});

/// n,m_b,delta,e2,rate,e2b,rate_b,seed with a leading "# config" provenance line.
void write_study_csv(std::ostream& os, const StudyResult& result);

/// {slope_interior, slope_boundary, intercepts, config, ...}
nlohmann::json study_summary(const StudyResult& result);

}  // namespace nmp
