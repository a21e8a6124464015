#pragma once

#include <stdexcept>
#include <string>

namespace bsdelab {

// Configuration input rejected before any computation starts.  The message
// names the offending field so callers can surface it verbatim.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error("config field '" + field + "': " + what),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Regression design matrix is rank deficient beyond what the ridge term can
// rescue.  Carries the measured condition number.
class ConditioningError : public std::runtime_error {
public:
    ConditioningError(double condition, const std::string& what)
        : std::runtime_error(what + " (condition number " + std::to_string(condition) + ")"),
          condition_(condition) {}

    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

// Fixed-point iteration exhausted its budget without meeting tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(int iterations, double last_delta, const std::string& what)
        : std::runtime_error(what + " after " + std::to_string(iterations) +
                             " iterations, last delta " + std::to_string(last_delta)),
          iterations_(iterations),
          last_delta_(last_delta) {}

    int iterations() const noexcept { return iterations_; }
    double last_delta() const noexcept { return last_delta_; }

private:
    int iterations_;
    double last_delta_;
};

// A matrix that must be invertible for the requested quantity turned out to
// be numerically singular at some node.
class DegeneracyError : public std::runtime_error {
public:
    explicit DegeneracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bsdelab
