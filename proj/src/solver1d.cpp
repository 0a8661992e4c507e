#include "nozzle/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nozzle/errors.hpp"

namespace nozzle {

Grid1D::Grid1D(int n) : n_cells(n), dz(1.0 / n) {
  if (n < 16) fail(ErrorKind::Domain, "1D grid needs at least 16 cells");
}

NozzleGrid NozzleGrid::build(const ChannelGeometry& geom, int n_cells, DerivativeRule rule) {
  NozzleGrid g;
  g.grid = Grid1D(n_cells);
  if (geom.kind() != SectionKind::Circular) rule = DerivativeRule::SampleGrid;
  for (int i = 0; i < n_cells; ++i) {
    const double z = g.grid.center(i);
    g.area_center.push_back(area(geom, z));
    g.log_slope.push_back(area_slope(geom, z, rule) / g.area_center.back());
  }
  for (int i = 0; i <= n_cells; ++i) g.area_face.push_back(area(geom, i * g.grid.dz));
  return g;
}

void Visc1DParams::validate() const {
  if (!(mu > 0.0)) fail(ErrorKind::Configuration, "shear viscosity mu must be positive");
  if (!(eta >= 0.0)) fail(ErrorKind::Configuration, "bulk viscosity eta must be non-negative");
}

double max_wave_speed(const State1D& s, const PressureLaw& law) {
  double a = 0.0;
  for (std::size_t i = 0; i < s.rho.size(); ++i) {
    if (!(s.rho[i] > 0.0)) fail(ErrorKind::Positivity, "non-positive density");
    a = std::max(a, std::abs(s.mom[i] / s.rho[i]) + law.sound_speed(s.rho[i]));
  }
  return a;
}

double stable_dt(const State1D& s, double dz, const PressureLaw& law, double cfl) {
  return cfl * dz / max_wave_speed(s, law);
}

namespace {

constexpr double kCflLimit = 0.45;

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

struct Flux {
  std::vector<double> mass;  // n + 1 faces
  std::vector<double> mom;
};

// Rusanov fluxes with minmod reconstruction and two wall ghost cells per side
// (density even, momentum odd).
Flux face_fluxes(const State1D& s, const PressureLaw& law) {
  const int n = static_cast<int>(s.rho.size());
  std::vector<double> r(n + 4), m(n + 4);
  for (int i = 0; i < n; ++i) {
    r[i + 2] = s.rho[i];
    m[i + 2] = s.mom[i];
  }
  r[1] = s.rho[0], r[0] = s.rho[1];
  m[1] = -s.mom[0], m[0] = -s.mom[1];
  r[n + 2] = s.rho[n - 1], r[n + 3] = s.rho[n - 2];
  m[n + 2] = -s.mom[n - 1], m[n + 3] = -s.mom[n - 2];

  std::vector<double> dr(n + 4, 0.0), dm(n + 4, 0.0);
  for (int k = 1; k < n + 3; ++k) {
    dr[k] = minmod(r[k + 1] - r[k], r[k] - r[k - 1]);
    dm[k] = minmod(m[k + 1] - m[k], m[k] - m[k - 1]);
  }
  Flux f;
  f.mass.resize(n + 1);
  f.mom.resize(n + 1);
  for (int j = 0; j <= n; ++j) {
    const int kl = j + 1, kr = j + 2;  // padded indices of the cells left and right of face j
    const double rl = r[kl] + 0.5 * dr[kl], ml = m[kl] + 0.5 * dm[kl];
    const double rr = r[kr] - 0.5 * dr[kr], mr = m[kr] - 0.5 * dm[kr];
    if (!(rl > 0.0) || !(rr > 0.0)) fail(ErrorKind::Positivity, "non-positive reconstructed density");
    const double ul = ml / rl, ur = mr / rr;
    const auto pl = law.eval(rl), pr = law.eval(rr);
    const double a = std::max(std::abs(ul) + std::sqrt(pl.dp), std::abs(ur) + std::sqrt(pr.dp));
    f.mass[j] = 0.5 * (ml + mr) - 0.5 * a * (rr - rl);
    f.mom[j] = 0.5 * (ml * ul + pl.p + mr * ur + pr.p) - 0.5 * a * (mr - ml);
  }
  return f;
}

// Semi-discrete operator. With area data, the update is the area-weighted
// conservative form written as the plain update minus a geometric correction,
// which vanishes identically when the area is constant.
State1D rhs(const State1D& s, const NozzleGrid* g, double dz, const PressureLaw& law) {
  const int n = static_cast<int>(s.rho.size());
  const Flux f = face_fluxes(s, law);
  State1D out;
  out.rho.resize(n);
  out.mom.resize(n);
  for (int i = 0; i < n; ++i) {
    double dr = -(f.mass[i + 1] - f.mass[i]) / dz;
    double dm = -(f.mom[i + 1] - f.mom[i]) / dz;
    if (g) {
      const double a = g->area_center[i];
      const double ap = g->area_face[i + 1] - a, am = g->area_face[i] - a;
      const double p = law.pressure(s.rho[i]);
      dr -= (ap * f.mass[i + 1] - am * f.mass[i]) / (dz * a);
      dm -= (ap * (f.mom[i + 1] - p) - am * (f.mom[i] - p)) / (dz * a);
    }
    out.rho[i] = dr;
    out.mom[i] = dm;
  }
  return out;
}

void check_dt(const State1D& s, double dz, const PressureLaw& law, double dt) {
  if (!(dt > 0.0)) fail(ErrorKind::Timestep, "time step must be positive");
  const double limit = kCflLimit * dz / max_wave_speed(s, law);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time step " << dt << " violates the CFL bound " << limit;
    fail(ErrorKind::Timestep, os.str());
  }
}

State1D ssp_rk2(const State1D& s, const NozzleGrid* g, double dz, const PressureLaw& law, double dt) {
  const int n = static_cast<int>(s.rho.size());
  const State1D k1 = rhs(s, g, dz, law);
  State1D s1 = s;
  for (int i = 0; i < n; ++i) {
    s1.rho[i] += dt * k1.rho[i];
    s1.mom[i] += dt * k1.mom[i];
  }
  if (std::any_of(s1.rho.begin(), s1.rho.end(), [](double r) { return !(r > 0.0); }))
    fail(ErrorKind::Positivity, "non-positive density in the first stage");
  const State1D k2 = rhs(s1, g, dz, law);
  State1D out = s;
  for (int i = 0; i < n; ++i) {
    out.rho[i] = 0.5 * s.rho[i] + 0.5 * (s1.rho[i] + dt * k2.rho[i]);
    out.mom[i] = 0.5 * s.mom[i] + 0.5 * (s1.mom[i] + dt * k2.mom[i]);
  }
  for (double r : out.rho)
    if (!(r > 0.0)) fail(ErrorKind::Positivity, "non-positive density after step");
  return out;
}

}  // namespace

State1D euler_step(const State1D& s, const NozzleGrid& g, const PressureLaw& law, double dt) {
  check_dt(s, g.grid.dz, law, dt);
  return ssp_rk2(s, &g, g.grid.dz, law, dt);
}

State1D isentropic_step(const State1D& s, const Grid1D& g, const PressureLaw& law, double dt) {
  check_dt(s, g.dz, law, dt);
  return ssp_rk2(s, nullptr, g.dz, law, dt);
}

std::vector<std::array<double, 3>> viscous_operator(const NozzleGrid& g, const Visc1DParams& visc) {
  const int n = g.size();
  const double h = g.grid.dz;
  const double nu = visc.nu() / (h * h);
  const double d = visc.drift() / (2.0 * h);
  const auto& a = g.log_slope;
  // nu D2 u + d D1 (a u) with ghosts u_{-1} = -u_0 and (a u)_{-1} = -(a u)_0.
  std::vector<std::array<double, 3>> rows(n);
  for (int i = 0; i < n; ++i) {
    rows[i][0] = i > 0 ? nu - d * a[i - 1] : 0.0;
    rows[i][1] = -2.0 * nu;
    rows[i][2] = i + 1 < n ? nu + d * a[i + 1] : 0.0;
  }
  rows[0][1] += -nu + d * a[0];
  rows[n - 1][1] += -nu - d * a[n - 1];
  if (visc.wall_traction) {
    const double m = visc.mu / (2.0 * h);
    for (int i = 0; i < n; ++i) {
      double a_z;
      if (i == 0)
        a_z = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * h);
      else if (i == n - 1)
        a_z = (3.0 * a[n - 1] - 4.0 * a[n - 2] + a[n - 3]) / (2.0 * h);
      else
        a_z = (a[i + 1] - a[i - 1]) / (2.0 * h);
      rows[i][1] -= visc.mu * (a_z + a[i] * a[i]);
      if (i > 0) rows[i][0] -= m * a[i];
      if (i + 1 < n) rows[i][2] += m * a[i];
    }
    rows[0][1] += m * a[0];
    rows[n - 1][1] -= m * a[n - 1];
  }
  return rows;
}

State1D ns_drift_step(const State1D& s, const NozzleGrid& g, const PressureLaw& law, const Visc1DParams& visc,
                      double dt) {
  visc.validate();
  State1D out = euler_step(s, g, law, dt);
  const int n = g.size();
  const auto rows = viscous_operator(g, visc);
  // rho (u - u*) / dt = L u
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = -rows[i][0];
    di[i] = out.rho[i] / dt - rows[i][1];
    up[i] = -rows[i][2];
    rhs[i] = out.mom[i] / dt;
  }
  // Thomas algorithm.
  for (int i = 1; i < n; ++i) {
    if (di[i - 1] == 0.0 || !std::isfinite(di[i - 1])) fail(ErrorKind::LinearSolver, "zero pivot in the viscous solve");
    const double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (di[n - 1] == 0.0 || !std::isfinite(di[n - 1])) fail(ErrorKind::LinearSolver, "zero pivot in the viscous solve");
  std::vector<double> u(n);
  u[n - 1] = rhs[n - 1] / di[n - 1];
  for (int i = n - 2; i >= 0; --i) u[i] = (rhs[i] - up[i] * u[i + 1]) / di[i];
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(u[i])) fail(ErrorKind::LinearSolver, "non-finite velocity in the viscous solve");
    out.mom[i] = out.rho[i] * u[i];
  }
  return out;
}

double total_mass(const State1D& s, const NozzleGrid& g) {
  double m = 0.0;
  for (int i = 0; i < g.size(); ++i) m += s.rho[i] * g.area_center[i];
  return m * g.grid.dz;
}

double total_energy(const State1D& s, const NozzleGrid& g, const PressureLaw& law) {
  double e = 0.0;
  for (int i = 0; i < g.size(); ++i)
    e += (0.5 * s.mom[i] * s.mom[i] / s.rho[i] + law.potential(s.rho[i])) * g.area_center[i];
  return e * g.grid.dz;
}

Trajectory1D run_1d(System1D system, const State1D& initial, const NozzleGrid& g, const PressureLaw& law,
                    const Visc1DParams& visc, double t_end, std::vector<double> outputs,
                    const Run1DOptions& options) {
  if (!(t_end >= 0.0)) fail(ErrorKind::Domain, "t_end must be non-negative");
  if (!(options.cfl > 0.0 && options.cfl <= kCflLimit)) fail(ErrorKind::Timestep, "CFL number outside (0, 0.45]");
  if (static_cast<int>(initial.rho.size()) != g.size() || initial.mom.size() != initial.rho.size())
    fail(ErrorKind::Domain, "initial state does not match the grid");
  if (system == System1D::NSDrift) visc.validate();
  std::sort(outputs.begin(), outputs.end());
  for (double t : outputs)
    if (t < 0.0 || t > t_end) fail(ErrorKind::Domain, "output time outside [0, t_end]");

  Trajectory1D traj;
  State1D s = initial;
  double t = 0.0;
  std::size_t next = 0;
  auto record = [&]() {
    traj.times.push_back(t);
    traj.states.push_back(s);
    traj.mass.push_back(total_mass(s, g));
    traj.energy.push_back(total_energy(s, g, law));
  };
  while (next < outputs.size() && outputs[next] <= 0.0) {
    record();
    ++next;
  }
  while (t < t_end) {
    double dt = stable_dt(s, g.grid.dz, law, options.cfl);
    double target = next < outputs.size() ? outputs[next] : t_end;
    bool hit = false;
    if (t + dt >= target) {
      dt = target - t;
      hit = true;
    }
    if (dt <= 0.0) break;
    s = system == System1D::Euler ? euler_step(s, g, law, dt) : ns_drift_step(s, g, law, visc, dt);
    ++traj.n_steps;
    t = hit ? target : t + dt;
    for (int i = 0; i < g.size(); ++i) {
      if (!(std::abs(s.mom[i] / s.rho[i]) <= options.breakdown_velocity)) {
        std::ostringstream os;
        os << "velocity exceeded " << options.breakdown_velocity << " at t = " << t;
        throw BreakdownError(t, os.str());
      }
    }
    while (next < outputs.size() && outputs[next] <= t) {
      record();
      ++next;
    }
    if (hit && next >= outputs.size() && t >= t_end) break;
  }
  return traj;
}

}  // namespace nozzle
