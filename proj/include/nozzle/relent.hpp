#pragma once

#include <vector>

#include "nozzle/geometry.hpp"
#include "nozzle/solver1d.hpp"
#include "nozzle/solver_axi.hpp"
#include "nozzle/thermo.hpp"

namespace nozzle {

// Reference values and derivatives at one point (t, z).
struct ReferencePoint {
  double r = 0.0, r_t = 0.0, r_z = 0.0;
  double v = 0.0, v_t = 0.0, v_z = 0.0, v_zz = 0.0;
};

// Density/velocity pair from 1D snapshots. Cubic Lagrange in t over the four
// nearest snapshots; linear in z between cell centres with wall parity
// (r even, v odd). z-derivatives are centred differences of the cell values,
// interpolated the same way.
class ReferencePair {
 public:
  static ReferencePair from_trajectory(const Trajectory1D& traj, const NozzleGrid& grid);
  // Time-independent pair given by cell values.
  static ReferencePair stationary(const State1D& s, const NozzleGrid& grid);

  ReferencePoint at(double t, double z) const;
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  const NozzleGrid& grid() const { return grid_; }
  double min_density() const;

 private:
  struct Snapshot {
    std::vector<double> r, v, r_z, v_z, v_zz;
  };
  static Snapshot make_snapshot(const State1D& s, double dz);
  struct Spatial {
    double r, v, r_z, v_z, v_zz;
  };
  Spatial spatial(const Snapshot& s, double z) const;

  NozzleGrid grid_;
  std::vector<double> times_;
  std::vector<Snapshot> snaps_;
};

// Radial coefficient of the tilt for a circular channel: V_h = b(z) x_h with
// b = R'/R, so U_eps = (b r v, v) in (r, z) components.
struct TiltCoefficient {
  double b = 0.0, b_z = 0.0, b_zz = 0.0;
};
TiltCoefficient circular_tilt_coefficient(const ChannelGeometry& geom, double z);

struct ExtendedVelocity {
  double ur = 0.0, uz = 0.0;
  double ur_t = 0.0, uz_t = 0.0;
  AxiVelocityGradient grad;
};

ExtendedVelocity extend_reference(const ReferencePoint& ref, const TiltCoefficient& tilt, double r);

// Axisymmetric state equal to the extended reference at the cell centroids.
AxiState well_prepared_state(const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref, double t = 0.0);

// Relative energy by centroid quadrature over Omega_eps.
double relative_energy(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                       double t, const PressureLaw& law);

// Remainder split into its five integrals. `direct` evaluates the defining
// expression through a separate code path.
struct RemainderTerms {
  double material = 0.0;   // int rho (d_t U + U.grad U) . (U - u)
  double quadratic = 0.0;  // -int rho (u - U) . grad U . (u - U)
  double viscous = 0.0;    // lambda int S(grad U) : grad(U - u)
  double enthalpy = 0.0;   // int (r - rho) d_t H'(r) + grad H'(r) . (r U - rho u)
  double pressure = 0.0;   // -int div U (p(rho) - p(r))
  double sum() const { return material + quadratic + viscous + enthalpy + pressure; }
  double direct = 0.0;
};

RemainderTerms remainder(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                         double t, const PressureLaw& law, const ViscParams3D& visc, CapCondition bc);

// lambda int (S(grad u) - S(grad U)) : (grad u - grad U).
double relative_dissipation_rate(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom,
                                 const ReferencePair& ref, double t, const ViscParams3D& visc, CapCondition bc);

struct ErrorTerms {
  double e1 = 0.0;
  double e2 = 0.0;
  double weighted_l1 = 0.0;  // int rho |U - u|
  double l1 = 0.0;           // int |U - u|
  // |E1| / (eps int rho |U - u|) and |E2| / (eps int |U - u|).
  double c1 = 0.0;
  double c2 = 0.0;
  // lambda int_{lateral wall} (S(grad U) n) . (U - u): the boundary integral
  // that appears when the viscous coupling is integrated by parts.
  double lateral_traction = 0.0;
  bool second_derivative_bounded = true;
};

ErrorTerms error_terms(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                       double t, const ViscParams3D& visc, double d2_bound = 1e3);

struct ContinuityResidual {
  double extended = 0.0;    // max |d_t r + div(r U_eps)| at quadrature points
  double one_d = 0.0;       // max |d_t(rA) + d_z(rvA)| / A from the 1D cell data
};

ContinuityResidual continuity_residual(const ReferencePair& ref, const ChannelGeometry& geom, double t,
                                       int n_r_points = 8);

struct ReiSample {
  double t = 0.0;
  double energy = 0.0;       // relative energy at t
  double dissipation = 0.0;  // time integral of the relative dissipation
  double remainder = 0.0;    // time integral of the remainder
  double residual = 0.0;     // LHS - RHS of the relative energy inequality
};

// Accumulates the relative energy inequality along a trajectory (trapezoid in time).
class RelativeEnergyTracker {
 public:
  RelativeEnergyTracker(const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                        const PressureLaw& law, const ViscParams3D& visc, CapCondition bc);
  void observe(double t, const AxiState& s);
  const std::vector<ReiSample>& samples() const { return samples_; }
  double max_residual() const;
  double sup_energy() const;
  // Largest time step seen between observations.
  double max_dt() const { return max_dt_; }

 private:
  const AxiGrid& grid_;
  const ChannelGeometry& geom_;
  const ReferencePair& ref_;
  const PressureLaw& law_;
  ViscParams3D visc_;
  CapCondition bc_;
  std::vector<ReiSample> samples_;
  double last_dissipation_ = 0.0, last_remainder_ = 0.0;
  double max_dt_ = 0.0;
};

}  // namespace nozzle
