#include "doctest.h"

#include <cmath>
#include <sstream>

#include "nmp/error.hpp"
#include "nmp/study.hpp"

using namespace nmp;

namespace {

struct Fixture {
    std::shared_ptr<const PointCloud> cloud =
        std::make_shared<const PointCloud>(sample_hemisphere(512, 64, 1, SamplingMode::Random));
    TestProblem z2 = hemisphere_z2();
    TestProblem x = hemisphere_x();

    std::vector<double> exact_u(const TestProblem& p) const {
        std::vector<double> u;
        for (const auto& s : cloud->interior) u.push_back(p.u_exact(s.position));
        return u;
    }
    std::vector<double> exact_v(const TestProblem& p) const {
        std::vector<double> v;
        for (const auto& s : cloud->boundary) v.push_back(p.du_dn_exact(s.position));
        return v;
    }
};

StudyConfig small_config() {
    StudyConfig c;
    c.problem = "z2";
    c.n_list = {512, 1250, 2592};
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("interior error trivial cases") {
    const Fixture f;
    auto u = f.exact_u(f.z2);
    CHECK(error_interior(u, f.z2, *f.cloud) == 0.0);
    for (auto& x : u) x *= 2.0;
    CHECK(error_interior(u, f.z2, *f.cloud) == doctest::Approx(1.0));

    const auto zero = zero_problem(ParametricManifold::hemisphere());
    CHECK_THROWS_AS(error_interior(u, zero, *f.cloud), MetricError);
    CHECK_THROWS_AS(error_interior(std::vector<double>(3), f.z2, *f.cloud), MetricError);
}

TEST_CASE("weighted error uses the areas") {
    const Fixture f;
    auto u = f.exact_u(f.x);
    u[0] += 0.1;
    double num = 0.01 * f.cloud->interior[0].area, den = 0.0;
    for (const auto& s : f.cloud->interior) den += std::pow(f.x.u_exact(s.position), 2) * s.area;
    CHECK(error_interior(u, f.x, *f.cloud) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-12));
}

TEST_CASE("boundary error falls back to absolute for zero flux") {
    const Fixture f;
    const auto v = f.exact_v(f.z2);
    const BoundaryError exact = error_boundary(v, f.z2, *f.cloud);
    CHECK(exact.value == 0.0);
    CHECK(exact.absolute);
    std::vector<double> off(v.size(), 0.5);
    const BoundaryError e = error_boundary(off, f.z2, *f.cloud);
    CHECK(e.absolute);
    CHECK(e.value == doctest::Approx(0.5 * std::sqrt(f.cloud->total_length())));

    // Non-zero flux on the disk: relative error.
    const auto disk = std::make_shared<const PointCloud>(sample_disk(256, 40, 1, SamplingMode::Random));
    const auto q = disk_quadratic();
    std::vector<double> dv;
    for (const auto& s : disk->boundary) dv.push_back(2.0 * q.du_dn_exact(s.position));
    const BoundaryError rel = error_boundary(dv, q, *disk);
    CHECK_FALSE(rel.absolute);
    CHECK(rel.value == doctest::Approx(1.0));
}

TEST_CASE("successive rate") {
    CHECK(successive_rate(0.0158, 0.0099, 0.250, 0.200) == doctest::Approx(2.0950).epsilon(0.0005 / 2.0950));
    CHECK(successive_rate(0.2, 0.1, 0.2, 0.1) == doctest::Approx(1.0));
    CHECK(successive_rate(0.4, 0.1, 0.2, 0.1) == doctest::Approx(2.0));
    CHECK_THROWS_AS(successive_rate(0.0, 0.1, 0.2, 0.1), MetricError);
    CHECK_THROWS_AS(successive_rate(0.1, -0.1, 0.2, 0.1), MetricError);
    CHECK_THROWS_AS(successive_rate(0.1, 0.1, 0.2, 0.2), MetricError);
}

TEST_CASE("log-log fit") {
    std::vector<double> x = {0.25, 0.2, 0.15, 0.1}, y;
    for (double d : x) y.push_back(std::exp(-1.34) * d * d);
    const LineFit fit = fit_log_log(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(-1.34));
    CHECK_THROWS_AS(fit_log_log(std::vector<double>{0.1}, std::vector<double>{0.2}), MetricError);
}

TEST_CASE("standard cloud sizes") {
    const auto n = standard_n_list();
    REQUIRE(n.size() == 8);
    CHECK(n.front() == 512);
    CHECK(n[2] == 2592);
    CHECK(n[6] == 20000);
    CHECK(n.back() == 29282);
}

TEST_CASE("study configuration validation") {
    auto field_of = [](StudyConfig c) {
        try {
            c.validate();
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string();
    };
    StudyConfig c = small_config();
    CHECK(field_of(c).empty());
    c.n_list = {512, 1250};
    CHECK(field_of(c) == "n_list");
    c.n_list = {512, 2592, 1250};
    CHECK(field_of(c) == "n_list");
    c = small_config();
    c.delta_list = {0.2};
    CHECK(field_of(c) == "delta_list");
    c = small_config();
    c.m_b_list = {10, 20};
    CHECK(field_of(c) == "m_b_list");
    c = small_config();
    c.problem = "nope";
    CHECK(field_of(c) == "problem");
    c = small_config();
    c.tol = 0.0;
    CHECK(field_of(c) == "tol");
}

TEST_CASE("study output is deterministic") {
    const StudyConfig c = small_config();
    std::vector<std::size_t> seen;
    const StudyResult a = run_study(c, [&](const ConvergenceRecord& r) { seen.push_back(r.n); });
    const StudyResult b = run_study(c);
    CHECK(seen == c.n_list);
    std::ostringstream sa, sb;
    write_study_csv(sa, a);
    write_study_csv(sb, b);
    CHECK(sa.str() == sb.str());

    std::istringstream lines(sa.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line.rfind("# config ", 0) == 0);
    while (line.rfind('#', 0) == 0) std::getline(lines, line);
    CHECK(line == "n,m_b,delta,e2,rate,e2b,rate_b,seed");
    std::getline(lines, line);
    CHECK(line.find(",N/A,") != std::string::npos);
    std::getline(lines, line);
    CHECK(line.find("N/A") == std::string::npos);

    REQUIRE(a.records.size() == 3);
    CHECK_FALSE(a.records[0].rate.has_value());
    CHECK(a.records[1].rate.has_value());
    CHECK(a.records[0].e2b_absolute);
    for (const auto& r : a.records) {
        CHECK(r.e2 > 0.0);
        CHECK(r.delta == doctest::Approx(default_delta(r.n)));
    }
    const auto summary = study_summary(a);
    CHECK(summary.contains("slope_interior"));
    CHECK(summary.contains("slope_boundary"));
    CHECK(summary.contains("intercepts"));
    CHECK(summary.at("config").at("seed") == 3);
}
