#pragma once

#include <functional>
#include <vector>

#include "nozzle/geometry.hpp"
#include "nozzle/thermo.hpp"

namespace nozzle {

// Mapped n_r x n_z quadrilateral grid of the meridian half-plane of a straight
// circular channel: r = rhat * eps * R(z). Cell (j, k) has index k * n_r + j.
struct AxiGrid {
  struct Face {
    double nr = 0.0, nz = 0.0;  // unit normal in the (r, z) plane
    double length = 0.0;
    double rm = 0.0, zm = 0.0;  // midpoint
    // Axisymmetric face vector (per radian): length * rm * n.
    double sr() const { return length * rm * nr; }
    double sz() const { return length * rm * nz; }
  };

  int n_r = 0;
  int n_z = 0;
  double epsilon = 1.0;
  std::vector<double> area;    // planar cell area
  std::vector<double> volume;  // int r dA (per radian)
  std::vector<double> rc, zc;  // centroids
  std::vector<double> h_r;     // radial cell width
  double h_z = 0.0;
  std::vector<Face> r_faces;   // (n_r + 1) * n_z, index k * (n_r + 1) + j, normal towards +r
  std::vector<Face> z_faces;   // n_r * (n_z + 1), index k * n_r + j, normal towards +z

  static AxiGrid build(const ChannelGeometry& geom, int n_r, int n_z);
  int cells() const { return n_r * n_z; }
  int cell(int j, int k) const { return k * n_r + j; }
  const Face& r_face(int j, int k) const { return r_faces[k * (n_r + 1) + j]; }
  const Face& z_face(int j, int k) const { return z_faces[k * n_r + j]; }
  // |Omega_eps| = 2 pi sum volume.
  double domain_volume() const;
};

struct AxiState {
  std::vector<double> rho, mr, mz;
};

struct ViscParams3D {
  double mu = 1.0;
  double eta = 1.0;
  double lambda = 1.0;
};

enum class CapCondition { SlipOnly, SlipPlusNoSlipCaps };

struct AxiVelocityGradient {
  double dr_ur = 0.0, dz_ur = 0.0, dr_uz = 0.0, dz_uz = 0.0;
  double hoop = 0.0;  // u_r / r, or d_r u_r on the axis
  double divergence() const { return dr_ur + hoop + dz_uz; }
};

struct AxiStress {
  double rr = 0.0, rz = 0.0, zz = 0.0, tt = 0.0;
  double trace() const { return rr + zz + tt; }
};

AxiStress stress_tensor(const AxiVelocityGradient& g, double mu, double eta);
// S(grad u) : grad u, including the hoop component.
double stress_contraction(const AxiStress& s, const AxiVelocityGradient& g);

// Fault injection hook: a negative sign turns the Rusanov dissipation into
// anti-dissipation. Only used to check that the energy guards fire.
struct AxiSchemeOptions {
  double dissipation_sign = 1.0;
};

double axi_stable_dt(const AxiState& s, const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc,
                     double cfl);
AxiState axi_step(const AxiState& s, const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc, double dt,
                  CapCondition bc, const AxiSchemeOptions& scheme = {});

// Cell-centred gradients of the velocity (Green-Gauss with boundary ghosts).
std::vector<AxiVelocityGradient> velocity_gradients(const AxiState& s, const AxiGrid& g, CapCondition bc);

double axi_mass(const AxiState& s, const AxiGrid& g);
double axi_energy(const AxiState& s, const AxiGrid& g, const PressureLaw& law);
// lambda int S(grad u) : grad u.
double axi_dissipation_rate(const AxiState& s, const AxiGrid& g, const ViscParams3D& visc, CapCondition bc);
// Mass flux through the lateral wall faces (identically zero by construction).
double wall_mass_flux(const AxiState& s, const AxiGrid& g, const PressureLaw& law);

struct EnergySample {
  double t = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double dissipation = 0.0;  // lambda int_0^t int S : grad u
  double residual = 0.0;     // E(t) + D(t) - E(0)
};

// Accumulates the discrete energy balance along a trajectory.
class EnergyMonitor {
 public:
  EnergyMonitor(const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc, CapCondition bc);
  void observe(double t, const AxiState& s);
  const std::vector<EnergySample>& samples() const { return samples_; }
  double max_residual() const;

 private:
  const AxiGrid& grid_;
  const PressureLaw& law_;
  ViscParams3D visc_;
  CapCondition bc_;
  std::vector<EnergySample> samples_;
  double last_rate_ = 0.0;
};

struct AxiRunOptions {
  double cfl = 0.4;
  AxiSchemeOptions scheme;
  bool monitor_energy = true;
};

struct AxiRunResult {
  AxiState final_state;
  int n_steps = 0;
  double t_final = 0.0;
  std::vector<double> mass;  // after each step, starting with the initial value
  std::vector<EnergySample> energy;
};

using AxiObserver = std::function<void(double t, double dt, const AxiState& s)>;

AxiRunResult run_axi(const AxiState& initial, const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc,
                     double t_end, CapCondition bc, const AxiRunOptions& options = {},
                     const AxiObserver& observer = {});

// Initial state from closed forms rho0(r, z), ur0(r, z), uz0(r, z) at cell centroids.
template <class R, class UR, class UZ>
AxiState sample_axi_state(const AxiGrid& g, R rho0, UR ur0, UZ uz0) {
  AxiState s;
  for (int c = 0; c < g.cells(); ++c) {
    const double r = g.rc[c], z = g.zc[c];
    const double rho = rho0(r, z);
    s.rho.push_back(rho);
    s.mr.push_back(rho * ur0(r, z));
    s.mz.push_back(rho * uz0(r, z));
  }
  return s;
}

}  // namespace nozzle
