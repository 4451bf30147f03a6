#pragma once

#include <stdexcept>
#include <string>

namespace dephasing {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates a documented precondition (even lattice size, bad index, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Operands built on incompatible bases or of mismatched dimension.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Reflection symmetry is broken, so parity classification is unavailable.
class SymmetryBroken : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator could not make progress.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// A physical invariant (trace, hermiticity, positivity) drifted beyond its abort threshold.
class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& what, double time, double value)
      : Error(what), time_(time), value_(value) {}
  double time() const noexcept { return time_; }
  double value() const noexcept { return value_; }

 private:
  double time_;
  double value_;
};

/// Steady-state search ran out of simulated time. Carries the last residual.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual, double elapsed)
      : Error(what), residual_(residual), elapsed_(elapsed) {}
  double residual() const noexcept { return residual_; }
  double elapsed_time() const noexcept { return elapsed_; }

 private:
  double residual_;
  double elapsed_;
};

/// A dense or structured eigensolver failed.
class SolverBreakdown : public Error {
 public:
  using Error::Error;
};

/// A closed-form shortcut was asked to go outside its domain of validity.
class OutsideValidity : public Error {
 public:
  using Error::Error;
};

}  // namespace dephasing
