#pragma once

#include <stdexcept>
#include <string>

namespace spiked {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violated its documented range (lambda <= 0, rho outside [0,1], ...).
class InvalidParameterError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested inside the support of a spectral measure.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A computation would exceed the double-exponent budget.
class OverflowGuardError : public Error {
 public:
  using Error::Error;
};

/// Dense materialization requested beyond the configured cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Arrays passed together were produced on different grids.
class GridMismatchError : public Error {
 public:
  using Error::Error;
};

/// A quantity that must stay positive did not (integration failure).
class PositivityError : public Error {
 public:
  using Error::Error;
};

/// An iterative method exhausted its iteration budget.
class NoConvergenceError : public Error {
 public:
  NoConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// A simulated trajectory diverged (step size too large for the drift).
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, int step, int replica = -1)
      : Error(what), step_(step), replica_(replica) {}
  int step() const { return step_; }
  int replica() const { return replica_; }

 private:
  int step_;
  int replica_;
};

/// Two supposedly equivalent internal routes disagreed beyond tolerance.
class InternalInconsistencyError : public Error {
 public:
  using Error::Error;
};

/// Run configuration failed strict validation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace spiked
