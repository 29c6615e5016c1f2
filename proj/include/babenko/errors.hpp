#pragma once

#include <stdexcept>
#include <string>

namespace babenko {

/// Base class for numerical failures (CLI exit status 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularJacobian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Branch switching re-converged onto the host branch for every perturbation tried.
class FallbackToHost : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPositiveDepth : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The surface x(t) is not monotone, so eta(x) cannot be formed.
class InvertibilityFailed : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SizeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Unreadable or incompatible branch file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace babenko
