#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nozzle/geometry.hpp"
#include "nozzle/thermo.hpp"

namespace nozzle {

struct Grid1D {
  int n_cells = 0;
  double dz = 0.0;

  explicit Grid1D(int n);
  double center(int i) const { return (i + 0.5) * dz; }
};

// Grid plus the area data the nozzle schemes need.
struct NozzleGrid {
  Grid1D grid{16};
  std::vector<double> area_center;
  std::vector<double> area_face;  // n_cells + 1 entries
  std::vector<double> log_slope;  // dA/dz / A at cell centers

  static NozzleGrid build(const ChannelGeometry& geom, int n_cells,
                          DerivativeRule rule = DerivativeRule::Analytic);
  int size() const { return grid.n_cells; }
};

struct State1D {
  std::vector<double> rho;
  std::vector<double> mom;

  double velocity(int i) const { return mom[i] / rho[i]; }
};

struct Visc1DParams {
  double mu = 1.0;
  double eta = 0.0;
  // Adds the averaged lateral-wall traction of a complete-slip channel:
  // -mu ((a' + a^2) u - a u') with a = A'/A.
  bool wall_traction = false;

  double nu() const { return 4.0 * mu / 3.0 + eta; }
  double drift() const { return mu / 3.0 + eta; }
  void validate() const;
};

enum class System1D { Euler, NSDrift };

double max_wave_speed(const State1D& s, const PressureLaw& law);
double stable_dt(const State1D& s, double dz, const PressureLaw& law, double cfl);

// One SSP-RK2 step of the area-weighted finite-volume scheme.
State1D euler_step(const State1D& s, const NozzleGrid& g, const PressureLaw& law, double dt);
// Convective step followed by an implicit velocity update for the viscous terms.
State1D ns_drift_step(const State1D& s, const NozzleGrid& g, const PressureLaw& law, const Visc1DParams& visc,
                      double dt);
// Rows (sub, diag, super) of the discrete viscous operator
// nu u'' + (mu/3 + eta) (A'/A u)' with u = 0 at both walls.
std::vector<std::array<double, 3>> viscous_operator(const NozzleGrid& g, const Visc1DParams& visc);
// Plain 1D isentropic Euler (no area); same flux and reconstruction.
State1D isentropic_step(const State1D& s, const Grid1D& g, const PressureLaw& law, double dt);

double total_mass(const State1D& s, const NozzleGrid& g);
double total_energy(const State1D& s, const NozzleGrid& g, const PressureLaw& law);

struct Run1DOptions {
  double cfl = 0.4;
  double breakdown_velocity = 1e3;
};

struct Trajectory1D {
  std::vector<double> times;
  std::vector<State1D> states;
  std::vector<double> mass;
  std::vector<double> energy;
  int n_steps = 0;
};

// States at the requested output times (sorted, within [0, t_end]).
Trajectory1D run_1d(System1D system, const State1D& initial, const NozzleGrid& g, const PressureLaw& law,
                    const Visc1DParams& visc, double t_end, std::vector<double> outputs,
                    const Run1DOptions& options = {});

// Cell averages of rho0 and rho0 * u0 by 3-point Gauss quadrature.
template <class R, class U>
State1D sample_state(const Grid1D& g, R rho0, U u0) {
  static const double xg[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
  static const double wg[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  State1D s;
  s.rho.resize(g.n_cells);
  s.mom.resize(g.n_cells);
  for (int i = 0; i < g.n_cells; ++i) {
    double r = 0.0, m = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double z = g.center(i) + 0.5 * g.dz * xg[q];
      r += wg[q] * rho0(z);
      m += wg[q] * rho0(z) * u0(z);
    }
    s.rho[i] = r;
    s.mom[i] = m;
  }
  return s;
}

}  // namespace nozzle
