#pragma once

#include <stdexcept>
#include <string>

namespace edgesync {

/// Invalid model, dissipation, or scenario parameters. CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested problem exceeds what the method supports (e.g. many-body N > 8).
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: non-finite integration state, failed eigensolver,
/// missing oscillation. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration produced a non-finite state.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// No synchronization modes found in a Liouvillian spectrum.
class ClassificationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// No dominant spectral peak in a time series.
class NoOscillationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace edgesync
