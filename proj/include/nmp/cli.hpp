#pragma once

// Command-line front end: gen, assemble, solve, study, verify, energy.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace nmp::cli {

constexpr int kSchemaVersion = 1;

/// Resolved run configuration. File values are loaded first, flags override.
struct RunConfig {
    int schema_version = kSchemaVersion;
    std::string manifold = "hemisphere";
    std::string problem;  // empty: first problem of the manifold
    std::size_t n = 512;
    std::size_t m_b = 0;  // 0: round(sqrt(8 n))
    std::vector<std::size_t> n_list;
    std::uint64_t seed = 0;
    std::string mode = "random";
    std::string weight_mode = "auto";
    std::optional<double> delta;
    double tol = 1e-10;
    std::size_t max_iter = 0;
    int resolution = 400;
    int draws = 1000;
    std::string cloud;  // optional input cloud JSON
    std::string out = ".";

    /// Throws ConfigError naming the offending field.
    void validate() const;
    nlohmann::json to_json() const;
    /// Unknown keys and a wrong schema_version are rejected.
    static RunConfig from_json(const nlohmann::json& doc);
};

/// Runs one subcommand. Artifacts go to the configured output directory, a
/// one-line JSON result to `out`, and errors as JSON to `err`. Exit codes:
/// 0 success, 1 computation failure, 2 invalid configuration, 3 I/O failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// The verify report for a resolved config:
/// {identity_residuals, kappa_n, rin_slope, rbd_slope, truncation, adjointness_gap, config}.
nlohmann::json verify_report(const RunConfig& config);

}  // namespace nmp::cli
