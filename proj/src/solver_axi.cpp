#include "nozzle/solver_axi.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nozzle/errors.hpp"

namespace nozzle {

namespace {

constexpr double kAcousticLimit = 0.45;
// Explicit viscous bound: dt <= kViscSafety * rho / (2 nu (1/h_r^2 + 1/h_z^2)).
constexpr double kViscSafety = 0.4;
constexpr double kViscLimit = 0.5;

AxiGrid::Face make_face(double r0, double z0, double r1, double z1, bool towards_z) {
  AxiGrid::Face f;
  const double tr = r1 - r0, tz = z1 - z0;
  f.length = std::hypot(tr, tz);
  if (towards_z) {
    f.nr = -tz / f.length;
    f.nz = tr / f.length;
  } else {
    f.nr = tz / f.length;
    f.nz = -tr / f.length;
  }
  f.rm = 0.5 * (r0 + r1);
  f.zm = 0.5 * (z0 + z1);
  return f;
}

}  // namespace

AxiGrid AxiGrid::build(const ChannelGeometry& geom, int n_r, int n_z) {
  if (geom.kind() != SectionKind::Circular) fail(ErrorKind::UnsupportedKind, "axisymmetric grid needs a circular channel");
  for (double z : {0.0, 0.37, 1.0})
    if (geom.centerline_slope(z).norm() != 0.0)
      fail(ErrorKind::UnsupportedKind, "axisymmetric grid needs a straight centerline");
  if (n_r < 8 || n_z < 32) fail(ErrorKind::Domain, "axisymmetric grid needs n_r >= 8 and n_z >= 32");
  AxiGrid g;
  g.n_r = n_r;
  g.n_z = n_z;
  g.epsilon = geom.epsilon();
  g.h_z = 1.0 / n_z;
  auto node_r = [&](int j, int k) { return static_cast<double>(j) / n_r * g.epsilon * geom.radius(static_cast<double>(k) / n_z); };
  auto node_z = [&](int k) { return static_cast<double>(k) / n_z; };
  for (int k = 0; k < n_z; ++k) {
    for (int j = 0; j < n_r; ++j) {
      const double r[4] = {node_r(j, k), node_r(j + 1, k), node_r(j + 1, k + 1), node_r(j, k + 1)};
      const double z[4] = {node_z(k), node_z(k), node_z(k + 1), node_z(k + 1)};
      double a = 0.0, cr = 0.0, cz = 0.0;
      for (int v = 0; v < 4; ++v) {
        const int w = (v + 1) % 4;
        const double cross = r[v] * z[w] - r[w] * z[v];
        a += cross;
        cr += (r[v] + r[w]) * cross;
        cz += (z[v] + z[w]) * cross;
      }
      a *= 0.5;
      if (!(a > 0.0)) fail(ErrorKind::DegenerateGeometry, "non-positive cell area in the axisymmetric grid");
      g.area.push_back(a);
      g.rc.push_back(cr / (6.0 * a));
      g.zc.push_back(cz / (6.0 * a));
      g.volume.push_back(a * g.rc.back());
      g.h_r.push_back(0.5 * (r[1] - r[0] + r[2] - r[3]));
    }
  }
  for (int k = 0; k < n_z; ++k)
    for (int j = 0; j <= n_r; ++j)
      g.r_faces.push_back(make_face(node_r(j, k), node_z(k), node_r(j, k + 1), node_z(k + 1), false));
  for (int k = 0; k <= n_z; ++k)
    for (int j = 0; j < n_r; ++j)
      g.z_faces.push_back(make_face(node_r(j, k), node_z(k), node_r(j + 1, k), node_z(k), true));
  return g;
}

double AxiGrid::domain_volume() const {
  double v = 0.0;
  for (double x : volume) v += x;
  return 2.0 * std::numbers::pi * v;
}

AxiStress stress_tensor(const AxiVelocityGradient& g, double mu, double eta) {
  const double div = g.divergence();
  const double bulk = (eta - 2.0 / 3.0 * mu) * div;
  AxiStress s;
  s.rr = 2.0 * mu * g.dr_ur + bulk;
  s.zz = 2.0 * mu * g.dz_uz + bulk;
  s.tt = 2.0 * mu * g.hoop + bulk;
  s.rz = mu * (g.dz_ur + g.dr_uz);
  return s;
}

double stress_contraction(const AxiStress& s, const AxiVelocityGradient& g) {
  return s.rr * g.dr_ur + s.zz * g.dz_uz + s.rz * (g.dz_ur + g.dr_uz) + s.tt * g.hoop;
}

namespace {

struct Prim {
  double rho = 0.0, ur = 0.0, uz = 0.0;
};

Prim reflect(const Prim& q, double nr, double nz) {
  const double un = q.ur * nr + q.uz * nz;
  return {q.rho, q.ur - 2.0 * un * nr, q.uz - 2.0 * un * nz};
}

double minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

Prim limited_slope(const Prim& m, const Prim& c, const Prim& p) {
  return {minmod(p.rho - c.rho, c.rho - m.rho), minmod(p.ur - c.ur, c.ur - m.ur), minmod(p.uz - c.uz, c.uz - m.uz)};
}

Prim add(const Prim& q, const Prim& d, double s) { return {q.rho + s * d.rho, q.ur + s * d.ur, q.uz + s * d.uz}; }

struct Cons {
  double rho = 0.0, mr = 0.0, mz = 0.0;
};

// Rusanov flux along unit normal (nr, nz).
Cons rusanov(const Prim& l, const Prim& r, double nr, double nz, const PressureLaw& law, double sign) {
  if (!(l.rho > 0.0) || !(r.rho > 0.0)) fail(ErrorKind::Positivity, "non-positive reconstructed density");
  const auto pl = law.eval(l.rho), pr = law.eval(r.rho);
  const double unl = l.ur * nr + l.uz * nz, unr = r.ur * nr + r.uz * nz;
  const double a = std::max(std::abs(unl) + std::sqrt(pl.dp), std::abs(unr) + std::sqrt(pr.dp));
  Cons f;
  f.rho = 0.5 * (l.rho * unl + r.rho * unr) - 0.5 * sign * a * (r.rho - l.rho);
  f.mr = 0.5 * (l.rho * l.ur * unl + pl.p * nr + r.rho * r.ur * unr + pr.p * nr) -
         0.5 * sign * a * (r.rho * r.ur - l.rho * l.ur);
  f.mz = 0.5 * (l.rho * l.uz * unl + pl.p * nz + r.rho * r.uz * unr + pr.p * nz) -
         0.5 * sign * a * (r.rho * r.uz - l.rho * l.uz);
  return f;
}

// Rusanov flux against the mirror state, in closed form: no mass crosses.
Cons wall_flux(const Prim& q, double nr, double nz, const PressureLaw& law, double sign) {
  if (!(q.rho > 0.0)) fail(ErrorKind::Positivity, "non-positive reconstructed density");
  const auto pv = law.eval(q.rho);
  const double un = q.ur * nr + q.uz * nz;
  const double a = std::abs(un) + std::sqrt(pv.dp);
  const double normal = pv.p + q.rho * un * un + sign * a * q.rho * un;
  return {0.0, normal * nr, normal * nz};
}

// Padded primitive field with two ghost layers per side.
class Padded {
 public:
  Padded(const AxiState& s, const AxiGrid& g) : nr_(g.n_r), nz_(g.n_z), w_(g.n_r + 4), data_((g.n_r + 4) * (g.n_z + 4)) {
    for (int k = 0; k < nz_; ++k)
      for (int j = 0; j < nr_; ++j) {
        const int c = g.cell(j, k);
        at(j, k) = {s.rho[c], s.mr[c] / s.rho[c], s.mz[c] / s.rho[c]};
      }
    for (int k = 0; k < nz_; ++k) {
      const auto& wf = g.r_face(nr_, k);
      for (int m = 0; m < 2; ++m) {
        const Prim& a = at(m, k);
        at(-1 - m, k) = {a.rho, -a.ur, a.uz};
        at(nr_ + m, k) = reflect(at(nr_ - 1 - m, k), wf.nr, wf.nz);
      }
    }
    for (int j = 0; j < nr_; ++j)
      for (int m = 0; m < 2; ++m) {
        const Prim& a = at(j, m);
        const Prim& b = at(j, nz_ - 1 - m);
        at(j, -1 - m) = {a.rho, a.ur, -a.uz};
        at(j, nz_ + m) = {b.rho, b.ur, -b.uz};
      }
  }
  Prim& at(int j, int k) { return data_[(k + 2) * w_ + j + 2]; }
  const Prim& at(int j, int k) const { return data_[(k + 2) * w_ + j + 2]; }

 private:
  int nr_, nz_, w_;
  std::vector<Prim> data_;
};

struct Grad {
  double dr = 0.0, dz = 0.0;
};

struct VelGrad {
  Grad ur, uz;
};

struct BoundaryValue {
  double ur, uz;
};

// Velocity on a boundary face as used by the gradient reconstruction, and the ghost value.
BoundaryValue wall_face_value(const Prim& c, const AxiGrid::Face& f) {
  const double un = c.ur * f.nr + c.uz * f.nz;
  return {c.ur - un * f.nr, c.uz - un * f.nz};
}

BoundaryValue cap_face_value(const Prim& c, CapCondition bc) {
  if (bc == CapCondition::SlipOnly) return {c.ur, 0.0};
  return {0.0, 0.0};
}

std::vector<VelGrad> cell_gradients(const Padded& q, const AxiGrid& g, CapCondition bc) {
  std::vector<VelGrad> grad(g.cells());
  auto accumulate = [&](int c, const AxiGrid::Face& f, double ur, double uz, double sign) {
    const double w = sign * f.length;
    grad[c].ur.dr += w * ur * f.nr;
    grad[c].ur.dz += w * ur * f.nz;
    grad[c].uz.dr += w * uz * f.nr;
    grad[c].uz.dz += w * uz * f.nz;
  };
  for (int k = 0; k < g.n_z; ++k) {
    for (int j = 0; j <= g.n_r; ++j) {
      const auto& f = g.r_face(j, k);
      if (j == 0) {
        accumulate(g.cell(0, k), f, 0.0, q.at(0, k).uz, -1.0);
      } else if (j == g.n_r) {
        const auto v = wall_face_value(q.at(j - 1, k), f);
        accumulate(g.cell(j - 1, k), f, v.ur, v.uz, 1.0);
      } else {
        const Prim& a = q.at(j - 1, k);
        const Prim& b = q.at(j, k);
        const double ur = 0.5 * (a.ur + b.ur), uz = 0.5 * (a.uz + b.uz);
        accumulate(g.cell(j - 1, k), f, ur, uz, 1.0);
        accumulate(g.cell(j, k), f, ur, uz, -1.0);
      }
    }
  }
  for (int k = 0; k <= g.n_z; ++k) {
    for (int j = 0; j < g.n_r; ++j) {
      const auto& f = g.z_face(j, k);
      if (k == 0 || k == g.n_z) {
        const int kc = k == 0 ? 0 : g.n_z - 1;
        const auto v = cap_face_value(q.at(j, kc), bc);
        accumulate(g.cell(j, kc), f, v.ur, v.uz, k == 0 ? -1.0 : 1.0);
      } else {
        const Prim& a = q.at(j, k - 1);
        const Prim& b = q.at(j, k);
        const double ur = 0.5 * (a.ur + b.ur), uz = 0.5 * (a.uz + b.uz);
        accumulate(g.cell(j, k - 1), f, ur, uz, 1.0);
        accumulate(g.cell(j, k), f, ur, uz, -1.0);
      }
    }
  }
  for (int c = 0; c < g.cells(); ++c) {
    const double inv = 1.0 / g.area[c];
    grad[c].ur.dr *= inv;
    grad[c].ur.dz *= inv;
    grad[c].uz.dr *= inv;
    grad[c].uz.dz *= inv;
  }
  return grad;
}

AxiVelocityGradient to_axi(const VelGrad& v, double ur, double r) {
  AxiVelocityGradient a;
  a.dr_ur = v.ur.dr;
  a.dz_ur = v.ur.dz;
  a.dr_uz = v.uz.dr;
  a.dz_uz = v.uz.dz;
  a.hoop = r > 0.0 ? ur / r : v.ur.dr;
  return a;
}

// Face gradient: average (or one-sided) cell gradient with a correction along
// the centroid-to-centroid direction.
VelGrad corrected(const VelGrad& avg, double dr, double dz, double dur, double duz) {
  const double len = std::hypot(dr, dz);
  const double er = dr / len, ez = dz / len;
  VelGrad out = avg;
  const double cur = dur / len - (avg.ur.dr * er + avg.ur.dz * ez);
  const double cuz = duz / len - (avg.uz.dr * er + avg.uz.dz * ez);
  out.ur.dr += cur * er;
  out.ur.dz += cur * ez;
  out.uz.dr += cuz * er;
  out.uz.dz += cuz * ez;
  return out;
}

VelGrad average(const VelGrad& a, const VelGrad& b) {
  return {{0.5 * (a.ur.dr + b.ur.dr), 0.5 * (a.ur.dz + b.ur.dz)}, {0.5 * (a.uz.dr + b.uz.dr), 0.5 * (a.uz.dz + b.uz.dz)}};
}

struct Traction {
  double r, z;
};

// lambda S . n_area for the given face gradient (n_area = face vector).
Traction viscous_traction(const VelGrad& vg, double ur_face, const AxiGrid::Face& f, const ViscParams3D& visc,
                          bool slip) {
  const AxiStress s = stress_tensor(to_axi(vg, ur_face, f.rm), visc.mu, visc.eta);
  double tr = s.rr * f.nr + s.rz * f.nz;
  double tz = s.rz * f.nr + s.zz * f.nz;
  if (slip) {
    // Zero tangential stress: keep only the normal traction.
    const double tn = tr * f.nr + tz * f.nz;
    tr = tn * f.nr;
    tz = tn * f.nz;
  }
  const double w = visc.lambda * f.length * f.rm;
  return {w * tr, w * tz};
}

struct Rhs {
  std::vector<double> rho, mr, mz;
};

Rhs evaluate_rhs(const AxiState& s, const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc,
                 CapCondition bc, const AxiSchemeOptions& scheme) {
  const int n = g.cells();
  const Padded q(s, g);
  const auto grad = cell_gradients(q, g, bc);
  Rhs out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  auto add_flux = [&](int c, const Cons& f, double w) {
    out.rho[c] -= w * f.rho;
    out.mr[c] -= w * f.mr;
    out.mz[c] -= w * f.mz;
  };
  auto add_visc = [&](int c, const Traction& t, double sign) {
    out.mr[c] += sign * t.r;
    out.mz[c] += sign * t.z;
  };
  const double sign = scheme.dissipation_sign;

  for (int k = 0; k < g.n_z; ++k) {
    for (int j = 1; j <= g.n_r; ++j) {
      const auto& f = g.r_face(j, k);
      const double w = f.length * f.rm;
      const int cl = g.cell(j - 1, k);
      const Prim& l = q.at(j - 1, k);
      const Prim left = add(l, limited_slope(q.at(j - 2, k), l, q.at(j, k)), 0.5);
      if (j == g.n_r) {
        add_flux(cl, wall_flux(left, f.nr, f.nz, law, sign), w);
        const auto v = wall_face_value(l, f);
        const double dn = 2.0 * ((f.rm - g.rc[cl]) * f.nr + (f.zm - g.zc[cl]) * f.nz);
        const Prim ghost = reflect(l, f.nr, f.nz);
        const VelGrad fg = corrected(grad[cl], dn * f.nr, dn * f.nz, ghost.ur - l.ur, ghost.uz - l.uz);
        add_visc(cl, viscous_traction(fg, v.ur, f, visc, true), 1.0);
        continue;
      }
      const int cr = g.cell(j, k);
      const Prim& r = q.at(j, k);
      const Prim right = add(r, limited_slope(l, r, q.at(j + 1, k)), -0.5);
      const Cons fl = rusanov(left, right, f.nr, f.nz, law, sign);
      add_flux(cl, fl, w);
      add_flux(cr, fl, -w);
      const VelGrad fg = corrected(average(grad[cl], grad[cr]), g.rc[cr] - g.rc[cl], g.zc[cr] - g.zc[cl],
                                   r.ur - l.ur, r.uz - l.uz);
      const Traction t = viscous_traction(fg, 0.5 * (l.ur + r.ur), f, visc, false);
      add_visc(cl, t, 1.0);
      add_visc(cr, t, -1.0);
    }
  }
  for (int k = 0; k <= g.n_z; ++k) {
    for (int j = 0; j < g.n_r; ++j) {
      const auto& f = g.z_face(j, k);
      const double w = f.length * f.rm;
      if (k == 0 || k == g.n_z) {
        const int kc = k == 0 ? 0 : g.n_z - 1;
        const double out_sign = k == 0 ? -1.0 : 1.0;  // outward normal = out_sign * (nr, nz)
        const int c = g.cell(j, kc);
        const Prim& a = q.at(j, kc);
        const Prim rec = k == 0 ? add(a, limited_slope(q.at(j, -1), a, q.at(j, 1)), -0.5)
                                : add(a, limited_slope(q.at(j, kc - 1), a, q.at(j, kc + 1)), 0.5);
        add_flux(c, wall_flux(rec, out_sign * f.nr, out_sign * f.nz, law, sign), w);
        const auto v = cap_face_value(a, bc);
        const double dz = 2.0 * (f.zm - g.zc[c]);
        const Prim ghost = bc == CapCondition::SlipOnly ? Prim{a.rho, a.ur, -a.uz} : Prim{a.rho, -a.ur, -a.uz};
        const VelGrad fg = corrected(grad[c], 0.0, dz, ghost.ur - a.ur, ghost.uz - a.uz);
        AxiGrid::Face outward = f;
        outward.nr *= out_sign;
        outward.nz *= out_sign;
        add_visc(c, viscous_traction(fg, v.ur, outward, visc, bc == CapCondition::SlipOnly), 1.0);
        continue;
      }
      const int cl = g.cell(j, k - 1), cr = g.cell(j, k);
      const Prim& l = q.at(j, k - 1);
      const Prim& r = q.at(j, k);
      const Prim left = add(l, limited_slope(q.at(j, k - 2), l, r), 0.5);
      const Prim right = add(r, limited_slope(l, r, q.at(j, k + 1)), -0.5);
      const Cons fl = rusanov(left, right, f.nr, f.nz, law, sign);
      add_flux(cl, fl, w);
      add_flux(cr, fl, -w);
      const VelGrad fg = corrected(average(grad[cl], grad[cr]), g.rc[cr] - g.rc[cl], g.zc[cr] - g.zc[cl],
                                   r.ur - l.ur, r.uz - l.uz);
      const Traction t = viscous_traction(fg, 0.5 * (l.ur + r.ur), f, visc, false);
      add_visc(cl, t, 1.0);
      add_visc(cr, t, -1.0);
    }
  }
  // Hoop source and division by the cell volume.
  for (int c = 0; c < n; ++c) {
    const int j = c % g.n_r, k = c / g.n_r;
    const Prim& a = q.at(j, k);
    const AxiStress st = stress_tensor(to_axi(grad[c], a.ur, g.rc[c]), visc.mu, visc.eta);
    out.mr[c] += (law.pressure(a.rho) - visc.lambda * st.tt) * g.area[c];
    const double inv = 1.0 / g.volume[c];
    out.rho[c] *= inv;
    out.mr[c] *= inv;
    out.mz[c] *= inv;
  }
  return out;
}

double acoustic_dt(const AxiState& s, const AxiGrid& g, const PressureLaw& law) {
  double dt = std::numeric_limits<double>::infinity();
  for (int c = 0; c < g.cells(); ++c) {
    if (!(s.rho[c] > 0.0)) fail(ErrorKind::Positivity, "non-positive density");
    const double u = std::hypot(s.mr[c], s.mz[c]) / s.rho[c];
    dt = std::min(dt, std::min(g.h_r[c], g.h_z) / (u + law.sound_speed(s.rho[c])));
  }
  return dt;
}

double viscous_dt(const AxiState& s, const AxiGrid& g, const ViscParams3D& visc) {
  const double nu = visc.lambda * (4.0 * visc.mu / 3.0 + visc.eta);
  if (nu == 0.0) return std::numeric_limits<double>::infinity();
  double dt = std::numeric_limits<double>::infinity();
  for (int c = 0; c < g.cells(); ++c)
    dt = std::min(dt, s.rho[c] / (2.0 * nu * (1.0 / (g.h_r[c] * g.h_r[c]) + 1.0 / (g.h_z * g.h_z))));
  return dt;
}

void validate_visc(const ViscParams3D& visc, CapCondition bc) {
  if (!(visc.mu > 0.0)) fail(ErrorKind::Configuration, "shear viscosity mu must be positive");
  if (!(visc.eta >= 0.0)) fail(ErrorKind::Configuration, "bulk viscosity eta must be non-negative");
  if (!(visc.lambda > 0.0)) fail(ErrorKind::Configuration, "viscosity scaling lambda must be positive");
  if (bc == CapCondition::SlipPlusNoSlipCaps && !(visc.eta > 0.0))
    fail(ErrorKind::Configuration, "bulk-viscosity hypothesis violated: no-slip caps require eta > 0");
}

}  // namespace

double axi_stable_dt(const AxiState& s, const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc,
                     double cfl) {
  return std::min(cfl * acoustic_dt(s, g, law), kViscSafety * viscous_dt(s, g, visc));
}

AxiState axi_step(const AxiState& s, const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc, double dt,
                  CapCondition bc, const AxiSchemeOptions& scheme) {
  validate_visc(visc, bc);
  if (!(dt > 0.0)) fail(ErrorKind::Timestep, "time step must be positive");
  const double limit = std::min(kAcousticLimit * acoustic_dt(s, g, law), kViscLimit * viscous_dt(s, g, visc));
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time step " << dt << " exceeds the stability bound " << limit;
    fail(ErrorKind::Timestep, os.str());
  }
  const int n = g.cells();
  const Rhs k1 = evaluate_rhs(s, g, law, visc, bc, scheme);
  AxiState s1 = s;
  for (int c = 0; c < n; ++c) {
    s1.rho[c] += dt * k1.rho[c];
    s1.mr[c] += dt * k1.mr[c];
    s1.mz[c] += dt * k1.mz[c];
    if (!(s1.rho[c] > 0.0)) fail(ErrorKind::Positivity, "non-positive density in the first stage");
  }
  const Rhs k2 = evaluate_rhs(s1, g, law, visc, bc, scheme);
  AxiState out = s;
  for (int c = 0; c < n; ++c) {
    out.rho[c] = 0.5 * s.rho[c] + 0.5 * (s1.rho[c] + dt * k2.rho[c]);
    out.mr[c] = 0.5 * s.mr[c] + 0.5 * (s1.mr[c] + dt * k2.mr[c]);
    out.mz[c] = 0.5 * s.mz[c] + 0.5 * (s1.mz[c] + dt * k2.mz[c]);
    if (!(out.rho[c] > 0.0)) fail(ErrorKind::Positivity, "non-positive density after step");
  }
  return out;
}

std::vector<AxiVelocityGradient> velocity_gradients(const AxiState& s, const AxiGrid& g, CapCondition bc) {
  const Padded q(s, g);
  const auto grad = cell_gradients(q, g, bc);
  std::vector<AxiVelocityGradient> out(g.cells());
  for (int c = 0; c < g.cells(); ++c) out[c] = to_axi(grad[c], s.mr[c] / s.rho[c], g.rc[c]);
  return out;
}

double axi_mass(const AxiState& s, const AxiGrid& g) {
  double m = 0.0;
  for (int c = 0; c < g.cells(); ++c) m += s.rho[c] * g.volume[c];
  return 2.0 * std::numbers::pi * m;
}

double axi_energy(const AxiState& s, const AxiGrid& g, const PressureLaw& law) {
  double e = 0.0;
  for (int c = 0; c < g.cells(); ++c)
    e += (0.5 * (s.mr[c] * s.mr[c] + s.mz[c] * s.mz[c]) / s.rho[c] + law.potential(s.rho[c])) * g.volume[c];
  return 2.0 * std::numbers::pi * e;
}

double axi_dissipation_rate(const AxiState& s, const AxiGrid& g, const ViscParams3D& visc, CapCondition bc) {
  const auto grads = velocity_gradients(s, g, bc);
  double d = 0.0;
  for (int c = 0; c < g.cells(); ++c)
    d += stress_contraction(stress_tensor(grads[c], visc.mu, visc.eta), grads[c]) * g.volume[c];
  return 2.0 * std::numbers::pi * visc.lambda * d;
}

double wall_mass_flux(const AxiState& s, const AxiGrid& g, const PressureLaw& law) {
  const Padded q(s, g);
  double worst = 0.0;
  for (int k = 0; k < g.n_z; ++k) {
    const auto& f = g.r_face(g.n_r, k);
    const Prim& l = q.at(g.n_r - 1, k);
    const Prim left = add(l, limited_slope(q.at(g.n_r - 2, k), l, q.at(g.n_r, k)), 0.5);
    worst = std::max(worst, std::abs(wall_flux(left, f.nr, f.nz, law, 1.0).rho));
  }
  return worst;
}

EnergyMonitor::EnergyMonitor(const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc, CapCondition bc)
    : grid_(g), law_(law), visc_(visc), bc_(bc) {}

void EnergyMonitor::observe(double t, const AxiState& s) {
  EnergySample e;
  e.t = t;
  for (int c = 0; c < grid_.cells(); ++c) {
    e.kinetic += 0.5 * (s.mr[c] * s.mr[c] + s.mz[c] * s.mz[c]) / s.rho[c] * grid_.volume[c];
    e.potential += law_.potential(s.rho[c]) * grid_.volume[c];
  }
  e.kinetic *= 2.0 * std::numbers::pi;
  e.potential *= 2.0 * std::numbers::pi;
  const double rate = axi_dissipation_rate(s, grid_, visc_, bc_);
  if (!samples_.empty()) {
    const auto& prev = samples_.back();
    e.dissipation = prev.dissipation + 0.5 * (t - prev.t) * (rate + last_rate_);
    e.residual = e.kinetic + e.potential + e.dissipation - samples_.front().kinetic - samples_.front().potential;
  }
  last_rate_ = rate;
  samples_.push_back(e);
}

double EnergyMonitor::max_residual() const {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& e : samples_) r = std::max(r, e.residual);
  return r;
}

AxiRunResult run_axi(const AxiState& initial, const AxiGrid& g, const PressureLaw& law, const ViscParams3D& visc,
                     double t_end, CapCondition bc, const AxiRunOptions& options, const AxiObserver& observer) {
  validate_visc(visc, bc);
  if (!(options.cfl > 0.0 && options.cfl <= kAcousticLimit)) fail(ErrorKind::Timestep, "CFL number outside (0, 0.45]");
  AxiRunResult res;
  EnergyMonitor monitor(g, law, visc, bc);
  AxiState s = initial;
  double t = 0.0;
  res.mass.push_back(axi_mass(s, g));
  if (options.monitor_energy) monitor.observe(t, s);
  if (observer) observer(t, 0.0, s);
  while (t < t_end) {
    double dt = axi_stable_dt(s, g, law, visc, options.cfl);
    const bool last = t + dt >= t_end;
    if (last) dt = t_end - t;
    if (dt <= 0.0) break;
    s = axi_step(s, g, law, visc, dt, bc, options.scheme);
    t = last ? t_end : t + dt;
    ++res.n_steps;
    res.mass.push_back(axi_mass(s, g));
    if (options.monitor_energy) monitor.observe(t, s);
    if (observer) observer(t, dt, s);
  }
  res.final_state = std::move(s);
  res.t_final = t;
  res.energy = monitor.samples();
  return res;
}

}  // namespace nozzle
