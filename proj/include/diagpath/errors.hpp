#pragma once

#include <stdexcept>
#include <string>

namespace diagpath {

// Exit codes used by the command-line driver.
enum class ExitCode : int {
    kSuccess = 0,
    kConfigError = 2,
    kDataError = 3,
    kNumericalFailure = 4,
};

/// Bad argument or configuration value (exit code 2).
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested object would exceed a size or memory guard (exit code 2).
class SizeError : public std::runtime_error {
public:
    SizeError(const std::string& what, double estimate)
        : std::runtime_error(what), estimate_(estimate) {}
    double estimate() const noexcept { return estimate_; }

private:
    double estimate_;
};

/// Malformed or missing input data (exit code 3).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical breakdown (exit code 4).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive integrator could not make progress.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, double last_good_time)
        : NumericalError(what), last_good_time_(last_good_time) {}
    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

/// Gram matrix is not symmetric positive semidefinite within tolerance.
class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace diagpath
