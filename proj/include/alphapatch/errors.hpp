#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace alphapatch {

// Argument outside the mathematical domain of a function (Gamma at x <= 0, alpha out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Singular kernel evaluated at z = 0.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Result does not fit in a double.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

// Caller violated a documented precondition.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Failures raised while a run is in progress carry the simulated time and step.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& what, double time, std::size_t step)
      : std::runtime_error(what), time_(time), step_(step) {}

  double time() const noexcept { return time_; }
  std::size_t step() const noexcept { return step_; }

  virtual const char* kind() const noexcept = 0;

 private:
  double time_;
  std::size_t step_;
};

class BlowUpError : public SimulationError {
 public:
  using SimulationError::SimulationError;
  const char* kind() const noexcept override { return "blow-up"; }
};

// Self-intersecting or under-resolved contour.
class InvalidGeometryError : public SimulationError {
 public:
  explicit InvalidGeometryError(const std::string& what, double time = 0.0, std::size_t step = 0)
      : SimulationError(what, time, step) {}
  const char* kind() const noexcept override { return "invalid-geometry"; }
};

// Bad configuration value; field() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Missing or corrupt files on disk.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace alphapatch
