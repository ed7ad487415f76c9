#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace jointmc {

// Base error carrying a stable machine-parsable category tag. The CLI
// reports failures as "error: <category>: <message>" and exits nonzero.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& message)
        : std::runtime_error(message), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class InvalidParameterError : public Error {
public:
    explicit InvalidParameterError(const std::string& message)
        : Error("invalid-parameter", message) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message)
        : Error("shape-violation", message) {}
};

// Thrown when a covariance assembly is not positive semidefinite.
class NotPositiveSemidefiniteError : public Error {
public:
    NotPositiveSemidefiniteError(const std::string& message, int leading_minor)
        : Error("not-positive-semidefinite", message), leading_minor_(leading_minor) {}

    // 1-based order of the first leading principal minor that fails.
    int leading_minor() const noexcept { return leading_minor_; }

private:
    int leading_minor_;
};

class SvdConvergenceError : public Error {
public:
    explicit SvdConvergenceError(const std::string& message)
        : Error("no-convergence", message) {}
};

class ZeroMatrixError : public Error {
public:
    explicit ZeroMatrixError(const std::string& message)
        : Error("zero-matrix", message) {}
};

class EmptyObservationError : public Error {
public:
    explicit EmptyObservationError(const std::string& message)
        : Error("empty-observation-set", message) {}
};

class CalibrationFailedError : public Error {
public:
    explicit CalibrationFailedError(const std::string& message)
        : Error("calibration-failed", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message)
        : Error("config-error", message) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& message)
        : Error("io-failure", message) {}
};

}  // namespace jointmc
