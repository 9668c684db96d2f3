#pragma once

#include <stdexcept>
#include <string>

namespace prsim {

/// Base class for all prsim errors. ConfigError maps to CLI exit code 2,
/// everything else derived from NumericError maps to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

/// Constraint Jacobian (full or reduced) is rank-deficient at the queried state.
class SingularJacobian : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Target coupling point lies outside the annulus of a two-link chain.
class Unreachable : public NumericError {
 public:
  Unreachable(int chain, const std::string& what)
      : NumericError(what), chain_(chain) {}
  int chain() const { return chain_; }

 private:
  int chain_;
};

/// Newton-Raphson forward kinematics failed to converge.
class NoConvergence : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Matrix expected to be symmetric positive definite is not.
class NotSPD : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Line of action queried while the force magnitude is below the validity gate.
class InvalidLoA : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Clamping-angle gradient entry is below the dead zone; no opening direction.
class DegenerateGradient : public NumericError {
 public:
  using NumericError::NumericError;
};

class DimensionMismatch : public NumericError {
 public:
  using NumericError::NumericError;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class EmptyGrid : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public NumericError {
 public:
  using NumericError::NumericError;
};

class UntrainedModel : public Error {
 public:
  using Error::Error;
};

/// Simulation state became non-finite.
class SimDiverged : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace prsim
