#include "nozzle/relent.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "nozzle/errors.hpp"

namespace nozzle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Lagrange weights and their t-derivatives on the nodes ts.
void lagrange(const double* ts, int n, double t, double* w, double* dw) {
  for (int j = 0; j < n; ++j) {
    double p = 1.0;
    for (int l = 0; l < n; ++l)
      if (l != j) p *= (t - ts[l]) / (ts[j] - ts[l]);
    w[j] = p;
    double d = 0.0;
    for (int m = 0; m < n; ++m) {
      if (m == j) continue;
      double q = 1.0 / (ts[j] - ts[m]);
      for (int l = 0; l < n; ++l)
        if (l != j && l != m) q *= (t - ts[l]) / (ts[j] - ts[l]);
      d += q;
    }
    dw[j] = d;
  }
}

// Quadratic f = a d + b d^2 in the distance d from a wall through f0 = f(h/2)
// and f1 = f(3h/2): slope and curvature at d = h/2.
double wall_slope(double f0, double f1, double h) { return (3.0 * f0 + f1) / (3.0 * h); }
double wall_curvature(double f0, double f1, double h) { return 4.0 * (f1 - 3.0 * f0) / (3.0 * h * h); }

}  // namespace

ReferencePair::Snapshot ReferencePair::make_snapshot(const State1D& s, double dz) {
  const int n = static_cast<int>(s.rho.size());
  Snapshot out;
  out.r = s.rho;
  out.v.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!(s.rho[i] > 0.0)) fail(ErrorKind::Domain, "reference density must be positive");
    out.v[i] = s.mom[i] / s.rho[i];
  }
  auto r_at = [&](int i) { return i < 0 ? out.r[0] : (i >= n ? out.r[n - 1] : out.r[i]); };
  auto v_at = [&](int i) { return i < 0 ? -out.v[0] : (i >= n ? -out.v[n - 1] : out.v[i]); };
  out.r_z.resize(n);
  out.v_z.resize(n);
  out.v_zz.resize(n);
  for (int i = 0; i < n; ++i) {
    out.r_z[i] = (r_at(i + 1) - r_at(i - 1)) / (2.0 * dz);
    out.v_z[i] = (v_at(i + 1) - v_at(i - 1)) / (2.0 * dz);
    out.v_zz[i] = (v_at(i + 1) - 2.0 * v_at(i) + v_at(i - 1)) / (dz * dz);
  }
  // v is not odd about a wall once the area varies; the odd ghost then costs
  // an order in v_z. Use the quadratic through v = 0 at the wall instead.
  if (n >= 2) {
    out.v_z[0] = wall_slope(out.v[0], out.v[1], dz);
    out.v_z[n - 1] = -wall_slope(out.v[n - 1], out.v[n - 2], dz);
    out.v_zz[0] = wall_curvature(out.v[0], out.v[1], dz);
    out.v_zz[n - 1] = wall_curvature(out.v[n - 1], out.v[n - 2], dz);
  }
  return out;
}

ReferencePair ReferencePair::from_trajectory(const Trajectory1D& traj, const NozzleGrid& grid) {
  if (traj.states.empty() || traj.states.size() != traj.times.size())
    fail(ErrorKind::IncompatibleData, "reference trajectory has no snapshots");
  ReferencePair p;
  p.grid_ = grid;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    if (traj.states[i].rho.size() != static_cast<std::size_t>(grid.size()))
      fail(ErrorKind::IncompatibleData, "snapshot size does not match the reference grid");
    if (i > 0 && !(traj.times[i] > traj.times[i - 1]))
      fail(ErrorKind::IncompatibleData, "snapshot times must increase");
    p.times_.push_back(traj.times[i]);
    p.snaps_.push_back(make_snapshot(traj.states[i], grid.grid.dz));
  }
  return p;
}

ReferencePair ReferencePair::stationary(const State1D& s, const NozzleGrid& grid) {
  Trajectory1D t;
  t.times = {0.0};
  t.states = {s};
  return from_trajectory(t, grid);
}

double ReferencePair::min_density() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : snaps_)
    for (double r : s.r) m = std::min(m, r);
  return m;
}

ReferencePair::Spatial ReferencePair::spatial(const Snapshot& s, double z) const {
  const int n = grid_.size();
  const double dz = grid_.grid.dz;
  const double pos = std::clamp(z, 0.0, 1.0) / dz - 0.5;
  int i0 = static_cast<int>(std::floor(pos));
  i0 = std::clamp(i0, -1, n - 1);
  const double w = pos - i0;
  // parity: +1 even, -1 odd
  // parity 0: linear extrapolation
  auto val = [&](const std::vector<double>& f, int i, double parity) {
    if (i < 0) return parity != 0.0 || n < 2 ? parity * f[0] : 2.0 * f[0] - f[1];
    if (i >= n) return parity != 0.0 || n < 2 ? parity * f[n - 1] : 2.0 * f[n - 1] - f[n - 2];
    return f[i];
  };
  auto lerp = [&](const std::vector<double>& f, double parity) {
    return (1.0 - w) * val(f, i0, parity) + w * val(f, i0 + 1, parity);
  };
  return {lerp(s.r, 1.0), lerp(s.v, -1.0), lerp(s.r_z, -1.0), lerp(s.v_z, 0.0), lerp(s.v_zz, 0.0)};
}

ReferencePoint ReferencePair::at(double t, double z) const {
  const int m = static_cast<int>(times_.size());
  ReferencePoint p;
  if (m == 1) {
    const Spatial a = spatial(snaps_[0], z);
    p.r = a.r;
    p.v = a.v;
    p.r_z = a.r_z;
    p.v_z = a.v_z;
    p.v_zz = a.v_zz;
    return p;
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(times_.back()));
  if (t < times_.front() - tol || t > times_.back() + tol)
    fail(ErrorKind::Domain, "time outside the reference trajectory");
  const int seg = static_cast<int>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
  const int k = std::min(4, m);
  const int first = std::clamp(seg - 1, 0, m - k);
  std::array<double, 4> ts{}, w{}, dw{};
  for (int j = 0; j < k; ++j) ts[j] = times_[first + j];
  lagrange(ts.data(), k, t, w.data(), dw.data());
  for (int j = 0; j < k; ++j) {
    const Spatial a = spatial(snaps_[first + j], z);
    p.r += w[j] * a.r;
    p.r_t += dw[j] * a.r;
    p.v += w[j] * a.v;
    p.v_t += dw[j] * a.v;
    p.r_z += w[j] * a.r_z;
    p.v_z += w[j] * a.v_z;
    p.v_zz += w[j] * a.v_zz;
  }
  return p;
}

TiltCoefficient circular_tilt_coefficient(const ChannelGeometry& geom, double z) {
  if (geom.kind() != SectionKind::Circular) fail(ErrorKind::UnsupportedKind, "closed-form tilt needs a circular channel");
  const auto& R = geom.radius_poly();
  auto b_of = [&](double s) { return R.derivative(s) / R(s); };
  auto bz_of = [&](double s) {
    const double b = b_of(s);
    return R.second_derivative(s) / R(s) - b * b;
  };
  TiltCoefficient c;
  c.b = b_of(z);
  c.b_z = bz_of(z);
  // The polynomial is smooth everywhere, so a centred difference is fine at the ends too.
  const double h = 1e-4;
  c.b_zz = (bz_of(z + h) - bz_of(z - h)) / (2.0 * h);
  return c;
}

ExtendedVelocity extend_reference(const ReferencePoint& ref, const TiltCoefficient& tilt, double r) {
  ExtendedVelocity e;
  e.ur = tilt.b * r * ref.v;
  e.uz = ref.v;
  e.ur_t = tilt.b * r * ref.v_t;
  e.uz_t = ref.v_t;
  e.grad.dr_ur = tilt.b * ref.v;
  e.grad.hoop = tilt.b * ref.v;
  e.grad.dz_ur = r * (tilt.b_z * ref.v + tilt.b * ref.v_z);
  e.grad.dr_uz = 0.0;
  e.grad.dz_uz = ref.v_z;
  return e;
}

AxiState well_prepared_state(const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref, double t) {
  AxiState s;
  for (int c = 0; c < g.cells(); ++c) {
    const auto p = ref.at(t, g.zc[c]);
    const auto u = extend_reference(p, circular_tilt_coefficient(geom, g.zc[c]), g.rc[c]);
    s.rho.push_back(p.r);
    s.mr.push_back(p.r * u.ur);
    s.mz.push_back(p.r * u.uz);
  }
  return s;
}

double relative_energy(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                       double t, const PressureLaw& law) {
  double e = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    const auto p = ref.at(t, g.zc[c]);
    const auto U = extend_reference(p, circular_tilt_coefficient(geom, g.zc[c]), g.rc[c]);
    const double u[2] = {s.mr[c] / s.rho[c], s.mz[c] / s.rho[c]};
    const double Uv[2] = {U.ur, U.uz};
    e += relative_energy_density(law, s.rho[c], u, p.r, Uv) * g.volume[c];
  }
  return kTwoPi * e;
}

namespace {

AxiVelocityGradient difference(const AxiVelocityGradient& a, const AxiVelocityGradient& b) {
  return {a.dr_ur - b.dr_ur, a.dz_ur - b.dz_ur, a.dr_uz - b.dr_uz, a.dz_uz - b.dz_uz, a.hoop - b.hoop};
}

// w . grad U . w' with grad U[i][j] = d_i U_j.
double bilinear(const AxiVelocityGradient& G, double wr, double wz, double qr, double qz) {
  return wr * (G.dr_ur * qr + G.dr_uz * qz) + wz * (G.dz_ur * qr + G.dz_uz * qz);
}

}  // namespace

RemainderTerms remainder(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                         double t, const PressureLaw& law, const ViscParams3D& visc, CapCondition bc) {
  const auto grads = velocity_gradients(s, g, bc);
  RemainderTerms out;
  for (int c = 0; c < g.cells(); ++c) {
    const double w = kTwoPi * g.volume[c];
    const auto p = ref.at(t, g.zc[c]);
    if (!(p.r > 0.0)) fail(ErrorKind::Domain, "reference density must be positive");
    const auto U = extend_reference(p, circular_tilt_coefficient(geom, g.zc[c]), g.rc[c]);
    const auto& G = U.grad;
    const double rho = s.rho[c];
    const double ur = s.mr[c] / rho, uz = s.mz[c] / rho;
    const double dr = U.ur - ur, dz = U.uz - uz;  // U - u

    const double adv_r = U.ur * G.dr_ur + U.uz * G.dz_ur;
    const double adv_z = U.ur * G.dr_uz + U.uz * G.dz_uz;
    out.material += w * rho * ((U.ur_t + adv_r) * dr + (U.uz_t + adv_z) * dz);
    out.quadratic -= w * rho * bilinear(G, -dr, -dz, -dr, -dz);

    const AxiStress SU = stress_tensor(G, visc.mu, visc.eta);
    const AxiVelocityGradient dG = difference(G, grads[c]);
    out.viscous += w * visc.lambda * stress_contraction(SU, dG);

    const auto pr = law.eval(p.r);
    const double h_t = pr.dp / p.r * p.r_t;
    const double h_z = pr.dp / p.r * p.r_z;
    out.enthalpy += w * ((p.r - rho) * h_t + h_z * (p.r * U.uz - rho * uz));
    out.pressure -= w * G.divergence() * (law.pressure(rho) - pr.p);

    // Defining form: rho (d_t U + u . grad U) . (U - u) with the viscous part written out.
    const double conv_r = ur * G.dr_ur + uz * G.dz_ur;
    const double conv_z = ur * G.dr_uz + uz * G.dz_uz;
    double direct = rho * ((U.ur_t + conv_r) * dr + (U.uz_t + conv_z) * dz);
    direct += visc.lambda * (SU.rr * dG.dr_ur + SU.zz * dG.dz_uz + SU.rz * (dG.dz_ur + dG.dr_uz) + SU.tt * dG.hoop);
    direct += (p.r - rho) * h_t + h_z * (p.r * U.uz - rho * uz);
    direct -= (G.dr_ur + G.hoop + G.dz_uz) * (law.pressure(rho) - pr.p);
    out.direct += w * direct;
  }
  return out;
}

double relative_dissipation_rate(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom,
                                 const ReferencePair& ref, double t, const ViscParams3D& visc, CapCondition bc) {
  const auto grads = velocity_gradients(s, g, bc);
  double d = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    const auto p = ref.at(t, g.zc[c]);
    const auto U = extend_reference(p, circular_tilt_coefficient(geom, g.zc[c]), g.rc[c]);
    const auto dG = difference(grads[c], U.grad);
    d += stress_contraction(stress_tensor(dG, visc.mu, visc.eta), dG) * g.volume[c];
  }
  return kTwoPi * visc.lambda * d;
}

ErrorTerms error_terms(const AxiState& s, const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                       double t, const ViscParams3D& visc, double d2_bound) {
  ErrorTerms out;
  const double nu = 4.0 * visc.mu / 3.0 + visc.eta;
  const double drift = visc.mu / 3.0 + visc.eta;
  double e2_first = 0.0, e2_second = 0.0;
  for (int c = 0; c < g.cells(); ++c) {
    const double w = kTwoPi * g.volume[c];
    const auto p = ref.at(t, g.zc[c]);
    const auto tc = circular_tilt_coefficient(geom, g.zc[c]);
    const auto U = extend_reference(p, tc, g.rc[c]);
    const auto& G = U.grad;
    const double rho = s.rho[c];
    const double ur = s.mr[c] / rho, uz = s.mz[c] / rho;
    const double dr = U.ur - ur, dz = U.uz - uz;
    if (std::abs(p.v_zz) > d2_bound) out.second_derivative_bounded = false;

    // (d_t U - d_t u_E) + U . grad U - u_E . grad u_E with u_E = (0, v).
    const double a_r = U.ur_t + U.ur * G.dr_ur + U.uz * G.dz_ur;
    const double a_z = U.uz_t - p.v_t + U.ur * G.dr_uz + U.uz * G.dz_uz - p.v * p.v_z;
    out.e1 += w * rho * (a_r * dr + a_z * dz);

    const double d_dlogA_v = 2.0 * (tc.b_z * p.v + tc.b * p.v_z);
    e2_first += w * (nu * p.v_zz + drift * d_dlogA_v) * (p.v - uz);
    // div S(grad U) = mu Lap U + (mu/3 + eta) grad div U for U = (b v x_h, v).
    const double bv_zz = tc.b_zz * p.v + 2.0 * tc.b_z * p.v_z + tc.b * p.v_zz;
    const double divS_r = visc.mu * g.rc[c] * bv_zz;
    const double divS_z = visc.mu * p.v_zz + drift * (d_dlogA_v + p.v_zz);
    e2_second += w * (divS_r * dr + divS_z * dz);

    const double mag = std::hypot(dr, dz);
    out.weighted_l1 += w * rho * mag;
    out.l1 += w * mag;
  }
  out.e2 = visc.lambda * (e2_first - e2_second);
  for (int k = 0; k < g.n_z; ++k) {
    const auto& f = g.r_face(g.n_r, k);
    const int c = g.cell(g.n_r - 1, k);
    const auto p = ref.at(t, f.zm);
    const auto U = extend_reference(p, circular_tilt_coefficient(geom, f.zm), f.rm);
    const AxiStress S = stress_tensor(U.grad, visc.mu, visc.eta);
    const double tr = S.rr * f.nr + S.rz * f.nz, tz = S.rz * f.nr + S.zz * f.nz;
    // Wall value of u: the tangential part of the adjacent cell velocity.
    double ur = s.mr[c] / s.rho[c], uz = s.mz[c] / s.rho[c];
    const double un = ur * f.nr + uz * f.nz;
    ur -= un * f.nr;
    uz -= un * f.nz;
    out.lateral_traction += kTwoPi * f.length * f.rm * (tr * (U.ur - ur) + tz * (U.uz - uz));
  }
  out.lateral_traction *= visc.lambda;
  const double eps = g.epsilon;
  out.c1 = out.weighted_l1 > 0.0 ? std::abs(out.e1) / (eps * out.weighted_l1) : 0.0;
  out.c2 = out.l1 > 0.0 ? std::abs(out.e2) / (eps * out.l1) : 0.0;
  return out;
}

ContinuityResidual continuity_residual(const ReferencePair& ref, const ChannelGeometry& geom, double t,
                                       int n_r_points) {
  const auto& ng = ref.grid();
  const int n = ng.size();
  const double dz = ng.grid.dz;
  const double eps = geom.epsilon();
  const TiltField tilt = scale_to_epsilon(tilt_field_circular(geom), eps);
  ContinuityResidual out;

  std::vector<ReferencePoint> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = ref.at(t, ng.grid.center(i));
  auto flux = [&](int i) { return pts[i].r * pts[i].v * ng.area_center[i]; };
  for (int i = 0; i < n; ++i) {
    const double A = ng.area_center[i];
    // r v A vanishes at both walls.
    double dflux;
    if (i == 0)
      dflux = wall_slope(flux(0), flux(1), dz);
    else if (i == n - 1)
      dflux = -wall_slope(flux(n - 1), flux(n - 2), dz);
    else
      dflux = (flux(i + 1) - flux(i - 1)) / (2.0 * dz);
    const double res = (A * pts[i].r_t + dflux) / A;
    out.one_d = std::max(out.one_d, std::abs(res));

    const double z = ng.grid.center(i);
    const double R = eps * geom.radius(z);
    const auto& p = pts[i];
    for (int j = 0; j < n_r_points; ++j) {
      const double r = (j + 0.5) / n_r_points * R;
      const double h = 1e-3 * R;
      // Horizontal divergence of the tilt by centred differences in x and y.
      const Vec2 x(r, 0.0);
      const double div_h = (tilt(x + Vec2(h, 0.0), z).x() - tilt(x - Vec2(h, 0.0), z).x() +
                            tilt(x + Vec2(0.0, h), z).y() - tilt(x - Vec2(0.0, h), z).y()) /
                           (2.0 * h);
      const double ext = p.r_t + p.r * (p.v * div_h + p.v_z) + p.v * p.r_z;
      out.extended = std::max(out.extended, std::abs(ext));
    }
  }
  return out;
}

RelativeEnergyTracker::RelativeEnergyTracker(const AxiGrid& g, const ChannelGeometry& geom, const ReferencePair& ref,
                                             const PressureLaw& law, const ViscParams3D& visc, CapCondition bc)
    : grid_(g), geom_(geom), ref_(ref), law_(law), visc_(visc), bc_(bc) {}

void RelativeEnergyTracker::observe(double t, const AxiState& s) {
  ReiSample x;
  x.t = t;
  x.energy = relative_energy(s, grid_, geom_, ref_, t, law_);
  const double d = relative_dissipation_rate(s, grid_, geom_, ref_, t, visc_, bc_);
  const double r = remainder(s, grid_, geom_, ref_, t, law_, visc_, bc_).sum();
  if (!samples_.empty()) {
    const auto& prev = samples_.back();
    const double dt = t - prev.t;
    max_dt_ = std::max(max_dt_, dt);
    x.dissipation = prev.dissipation + 0.5 * dt * (d + last_dissipation_);
    x.remainder = prev.remainder + 0.5 * dt * (r + last_remainder_);
    x.residual = x.energy + x.dissipation - samples_.front().energy - x.remainder;
  }
  last_dissipation_ = d;
  last_remainder_ = r;
  samples_.push_back(x);
}

double RelativeEnergyTracker::max_residual() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& x : samples_) m = std::max(m, x.residual);
  return m;
}

double RelativeEnergyTracker::sup_energy() const {
  double m = 0.0;
  for (const auto& x : samples_) m = std::max(m, x.energy);
  return m;
}

}  // namespace nozzle
