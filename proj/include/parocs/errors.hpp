#pragma once

#include <stdexcept>
#include <string>

namespace parocs {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user input: bad grid sizes, malformed expressions, role mismatches.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A standing assumption of the problem class was violated at run time
/// (e.g. a sampled f_y < 0, a nonconvex perturbation).
class AssumptionViolation : public Error {
public:
    using Error::Error;
};

/// An iterative solve did not converge.  Carries enough context to reproduce.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, int step, double residual)
        : Error(what), step(step), residual(residual) {}
    int step = -1;
    double residual = 0.0;
};

/// Raised by exponent fitting when the data cannot support a fit.
class FitError : public Error {
public:
    using Error::Error;
};

}  // namespace parocs
