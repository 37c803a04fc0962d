#pragma once

#include <stdexcept>
#include <string>

namespace lclab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: unknown family, bad parameters, dimension mismatch,
/// unreadable descriptor files.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Failures of the numerical machinery. The CLI maps these to exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The integration box cuts off non-negligible mass.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The tilted integrand e^{-<x,z>} f(z) is not integrable.
class DivergentTiltError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Covariance (or another matrix that must be SPD) is singular.
class DegenerateError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotCenteredError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace lclab
