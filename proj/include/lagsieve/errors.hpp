#pragma once

#include <stdexcept>
#include <string>

namespace lagsieve {

// Bad input: out-of-domain arguments, malformed records or config.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Polynomial degree above the supported recurrence ceiling.
class UnsupportedDegreeError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Numerical failure. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature or iteration that did not reach its tolerance. Carries the
// best estimate that was achieved.
class AccuracyError : public NumericalError {
public:
    AccuracyError(const std::string& what, double estimate, double error_bound)
        : NumericalError(what + " (estimate " + std::to_string(estimate) + ", error bound " +
                         std::to_string(error_bound) + ")"),
          estimate_(estimate),
          error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

// Integral diverges for the requested parameters (e.g. tilt r <= -1).
class DivergentIntegralError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Degenerate problem: zero projection, all-floor likelihood, zero normalizer.
class DegenerateError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace lagsieve
