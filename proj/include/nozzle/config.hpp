#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nozzle/convergence.hpp"
#include "nozzle/errors.hpp"
#include "nozzle/korn.hpp"

namespace nozzle {

struct GeometryConfig {
  std::string kind = "circular";  // circular | ellipse | tabulated
  Polynomial radius{{1.0, 0.5}};
  Polynomial centerline_x, centerline_y;
  // Ellipse family: semi-axes a(z), b(z), tabulated on n_slices levels.
  Polynomial semi_a{{1.0}};
  Polynomial semi_b{{0.6, 0.2}};
  int n_slices = 33;
  int n_vertices = 64;
  // Tabulated: CSV rows "slice,x,y", slices 0..n-1 equally spaced in z.
  std::string sections_file;
  double epsilon = 0.1;
  int n_z_samples = 64;
  int neumann_rings = 16;
  double identity_tol = 1e-10;
};

struct PressureConfig {
  double gamma = 2.0;
  double kappa = 1.0;
};

struct Solver1DConfig {
  std::string system = "euler";  // euler | ns-drift
  int n_cells = 128;
  double cfl = 0.4;
  double t_end = 0.25;
  int outputs = 11;
  double mu = 1.0;
  double eta = 1.0;
  bool wall_traction = false;
  double rho_amp = 0.1;
  double u_amp = 0.2;
};

struct AxiConfig {
  int n_r = 16;
  int n_z = 64;
  double cfl = 0.4;
  double t_end = 0.1;
  double epsilon = 0.1;
  double lambda = 0.1;
  double mu = 1.0;
  double eta = 1.0;
  std::string caps = "slip";  // slip | no-slip
  // Seeded random density perturbation of the well-prepared start.
  double perturbation = 0.0;
  double rho_amp = 0.1;
  double u_amp = 0.2;
  double energy_tol = 1e-10;
};

struct KornConfig {
  std::vector<double> epsilons{0.4, 0.2, 0.1};
  Polynomial radius{{1.0}};  // circular channel without centerline offset
  ChannelResolution resolution;
  double slope_target = -2.0;
  double slope_tol = 0.3;
  double max_ratio = 3.0;
  bool constrained = true;
};

struct PoincareConfig {
  double radius = 1.0;
  std::vector<int> rings{8, 16};
  std::vector<double> dilations{0.3, 0.05};
  double stability_tol = 0.05;
  int trace_vertices = 200000;
  double trace_tol = 1e-8;
};

struct ExperimentConfig {
  GeometryConfig geometry;
  PressureConfig pressure;
  Solver1DConfig solver1d;
  AxiConfig axi;
  StudyConfig study;  // gamma, kappa and radius are taken from the sections above
  double q_min = 0.8;
  double energy_tol = 1e-10;
  KornConfig korn;
  PoincareConfig poincare;
  std::string output_dir = "nozzle-out";
  std::uint64_t seed = 12345;
  int jobs = 0;  // 0: one per sweep cell, capped at the CPU count
};

// All validation errors of one load, in file order.
class ConfigError : public LabError {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  std::vector<std::string> errors_;
};

// Relative file references resolve against base_dir.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<string>",
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Hypothesis and range checks; throws ConfigError listing every violation.
void validate_config(const ExperimentConfig& config);

// Canonical JSON text of the effective configuration (sorted keys).
std::string canonical_config(const ExperimentConfig& config);
// 16 hex digits, FNV-1a of the canonical text; independent of key order in the file.
std::string config_hash(const ExperimentConfig& config);

ChannelGeometry make_geometry(const GeometryConfig& g);

}  // namespace nozzle
