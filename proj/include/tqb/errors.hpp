// errors.hpp - exception hierarchy shared by every tqb module.
#pragma once

#include <stdexcept>
#include <string>

namespace tqb {

/// Base class of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller violated a precondition (wrong basis tag, bad argument).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A value failed the invariants of its type (trace, Hermiticity, positivity).
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Base for failures of a numerical procedure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Integration step too coarse, or output corrections too large.
class AccuracyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Integrated state left the set of density matrices.
class IntegrationFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Closed-form vacuum solution is singular at Gamma = Gamma12; use the oracle.
class DegenerateRates : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A block system does not reproduce the full generator.
class ModelInconsistency : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Eigenbasis of a block matrix is too ill-conditioned; use the oracle.
class IllConditioned : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace tqb
