#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nmp {

/// Failure categories surfaced to callers and to the CLI error JSON.
enum class ErrorKind {
    Domain,
    Config,
    Geometry,
    Assembly,
    SingularReduction,
    NonConvergence,
    Metric,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class DomainError : public Error {
public:
    explicit DomainError(const std::string& m) : Error(ErrorKind::Domain, m) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& m, std::string field = {})
        : Error(ErrorKind::Config, m), field_(std::move(field)) {}

    /// Name of the offending config field, empty when not attributable.
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& m) : Error(ErrorKind::Geometry, m) {}
};

class SingularReductionError : public Error {
public:
    explicit SingularReductionError(const std::string& m)
        : Error(ErrorKind::SingularReduction, m) {}
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& m, std::vector<double> history)
        : Error(ErrorKind::NonConvergence, m), history_(std::move(history)) {}

    /// Relative residual after every iteration, starting with the initial guess.
    const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

class MetricError : public Error {
public:
    explicit MetricError(const std::string& m) : Error(ErrorKind::Metric, m) {}
};

class IoError : public Error {
public:
    IoError(const std::string& m, std::string path)
        : Error(ErrorKind::Io, m), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace nmp
