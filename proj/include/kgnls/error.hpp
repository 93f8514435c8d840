#pragma once

#include <stdexcept>
#include <string>

namespace kgnls {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field contains NaN or infinite samples.
class InvalidFieldError : public Error {
 public:
  using Error::Error;
};

/// Grids are incommensurate (period / node count mismatch).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A scalar argument lies outside the admissible domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A closed-form solution was evaluated at (or next to) a pole.
class SingularEvaluationError : public Error {
 public:
  using Error::Error;
};

/// Coefficients of opposite sign cannot be mapped onto the focusing NLS.
class DefocusingIncompatibilityError : public Error {
 public:
  using Error::Error;
};

/// A user-supplied solution failed residual certification.
class CertificationError : public Error {
 public:
  using Error::Error;
};

/// A time integrator blew up.
class InstabilityError : public Error {
 public:
  InstabilityError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Error ladder did not decrease monotonically.
class InconclusiveOrderError : public Error {
 public:
  using Error::Error;
};

/// Missing or malformed input data for an operation.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Configuration file syntax or semantic problem.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace kgnls
