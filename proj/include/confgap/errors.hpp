#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace confgap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A point or parameter lies outside the valid range of a model or formula.
class DomainError : public Error {
public:
    using Error::Error;
};

/// The requested operation is not defined for the given chart or input.
class UnsupportedOperation : public Error {
public:
    using Error::Error;
};

/// Boundary data that cannot describe a valid planar domain.
class MalformedDomain : public Error {
public:
    using Error::Error;
};

/// Mesh refinement could not reach the requested quality.
class RefinementFailure : public Error {
public:
    using Error::Error;
};

/// A weight function that is not strictly positive where it must be.
class InvalidWeight : public Error {
public:
    using Error::Error;
};

/// A hypothesis threshold (diameter, radius) is violated.
class ThresholdError : public Error {
public:
    using Error::Error;
};

/// Factorization failure, non-convergence, loss of positivity.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, std::vector<double> history = {})
        : Error(what), history_(std::move(history)) {}

    /// Residual or iterate trace recorded before the failure.
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace confgap
