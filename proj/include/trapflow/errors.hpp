#pragma once

#include <stdexcept>
#include <string>

namespace trapflow {

/// Base class for all trapflow errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed configuration document (missing key, wrong type). Carries the field path.
class SchemaError : public Error {
public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

/// Well-formed input outside the admissible parameter domain.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

/// Right-hand side of the pure-Neumann Poisson problem has nonzero mean.
class CompatibilityViolation : public Error {
public:
  explicit CompatibilityViolation(const std::string& msg) : Error(msg) {}
};

/// Initial data violate the discrete charge-neutrality constraint.
class ChargeNeutralityViolation : public Error {
public:
  explicit ChargeNeutralityViolation(const std::string& msg) : Error(msg) {}
};

/// An iterative solve stalled or exceeded its iteration budget.
class NonConvergence : public Error {
public:
  NonConvergence(const std::string& msg, double residual)
      : Error(msg), final_residual(residual) {}
  double final_residual;
};

/// The scalar trap-occupancy equation could not be bracketed in [0,1].
class RootBracketFailure : public Error {
public:
  explicit RootBracketFailure(const std::string& msg) : Error(msg) {}
};

/// Reference density in a relative-entropy expression is not strictly positive.
class NonpositiveReference : public Error {
public:
  explicit NonpositiveReference(const std::string& msg) : Error(msg) {}
};

/// Too few usable samples for a decay fit.
class InsufficientData : public Error {
public:
  explicit InsufficientData(const std::string& msg) : Error(msg) {}
};

} // namespace trapflow
