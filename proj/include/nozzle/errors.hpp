#pragma once

#include <stdexcept>
#include <string>

namespace nozzle {

enum class ErrorKind {
  Domain,
  UnsupportedKind,
  IncompatibleData,
  DegenerateGeometry,
  FlowEscape,
  Timestep,
  Positivity,
  LinearSolver,
  Breakdown,
  Configuration,
  CoercivityViolation,
  Numerical,
  IllPosedConstraint,
  DegenerateInput,
};

const char* to_string(ErrorKind kind);

class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Thrown by run_1d when the velocity blows up; carries the time of detection.
class BreakdownError : public LabError {
 public:
  BreakdownError(double time, const std::string& what)
      : LabError(ErrorKind::Breakdown, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace nozzle
