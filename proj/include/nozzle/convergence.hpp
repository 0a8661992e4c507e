#pragma once

#include <string>
#include <vector>

#include "nozzle/rate_fit.hpp"
#include "nozzle/relent.hpp"

namespace nozzle {

enum class StudyMode { Inviscid, Viscous };

struct StudyConfig {
  StudyMode mode = StudyMode::Inviscid;
  Polynomial radius{{1.0, 0.5}};
  double gamma = 2.0;
  double kappa = 1.0;
  // Reference data: rho0 = 1 + rho_amp cos(pi z), u0 = u_amp sin(pi z).
  double rho_amp = 0.1;
  double u_amp = 0.2;
  double t_end = 0.25;
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  // Empty: lambda = epsilon (inviscid) or lambda = 1 (viscous).
  std::vector<double> lambdas;
  double mu = 1.0;
  double eta = 1.0;
  int n_r = 16;
  int n_z = 64;
  int snapshots = 101;
  double cfl = 0.4;
  // CFL of the 1D reference run; small values keep its time error below the rate signal.
  double reference_cfl = 0.05;
  // Viscous reference with the averaged lateral-wall traction term.
  bool wall_traction = false;
  // Refinement of the largest-epsilon run used to estimate the scheme floor.
  bool estimate_floor = true;
  int jobs = 1;
  AxiSchemeOptions scheme;
};

struct StudyPoint {
  double epsilon = 0.0;
  double lambda = 0.0;
  int n_r = 0, n_z = 0;
  double volume = 0.0;
  double sup_energy = 0.0;
  double sup_normalized = 0.0;
  int n_steps = 0;
  double max_dt = 0.0;
  double h = 0.0;               // axial cell size
  double rei_max_residual = 0.0;
  double rei_scale = 0.0;       // max_dt + h^2
  double max_c1 = 0.0, max_c2 = 0.0;
  // sup_t |lateral traction integral| / sup_t (eps int |U - u|)
  double max_c_wall = 0.0;
  bool second_derivative_bounded = true;
  double energy_residual = 0.0; // max of E + D - E(0) for the plain energy
  double mass_drift = 0.0;      // max |M - M0| / M0
  std::vector<double> times;
  std::vector<double> normalized;  // E_eps(t) / |Omega_eps|
};

struct RelativeEnergyReport {
  StudyMode mode = StudyMode::Inviscid;
  double horizon = 0.0;
  std::vector<StudyPoint> points;
  // Floor: sup_normalized at the coarse grid minus the refined value, clamped at 0.
  double floor = 0.0;
  StudyPoint floor_refined;
  bool has_floor = false;
  PowerFit fit;
  bool monotone = false;
  // C in residual <= C (dt + h^2), fitted from the floor refinement pair.
  double rei_constant = 0.0;
  std::vector<std::string> notes;
};

// 1D reference for the study: Euler (inviscid) or NSdrift (viscous), with
// breakdown shortening the horizon. Returns the reference and the horizon.
struct StudyReference {
  ChannelGeometry geom;
  NozzleGrid grid;
  ReferencePair pair;
  double horizon = 0.0;
  std::vector<std::string> notes;
};
StudyReference build_reference(const StudyConfig& config, int n_z);

StudyPoint run_study_point(const StudyConfig& config, const StudyReference& ref, double epsilon, double lambda,
                           int n_r, int n_z);

RelativeEnergyReport convergence_study(const StudyConfig& config);

// Validates the configuration against the hypotheses of the chosen mode.
void validate_study(const StudyConfig& config);

}  // namespace nozzle
