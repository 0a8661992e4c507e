#include "nozzle/errors.hpp"

namespace nozzle {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::UnsupportedKind: return "unsupported-kind";
    case ErrorKind::IncompatibleData: return "incompatible-data";
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::FlowEscape: return "flow-escape";
    case ErrorKind::Timestep: return "timestep";
    case ErrorKind::Positivity: return "positivity";
    case ErrorKind::LinearSolver: return "linear-solver";
    case ErrorKind::Breakdown: return "solution-breakdown";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::CoercivityViolation: return "coercivity-violation";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::IllPosedConstraint: return "ill-posed-constraint";
    case ErrorKind::DegenerateInput: return "degenerate-input";
  }
  return "unknown";
}

LabError::LabError(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw LabError(kind, what); }

}  // namespace nozzle
