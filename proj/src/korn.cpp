#include "nozzle/korn.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "nozzle/errors.hpp"

namespace nozzle {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::Matrix3d nodal_gradient(const ChannelMesh& mesh, std::size_t p, const std::array<Vec3, 6>& grad,
                               const Eigen::VectorXd& v) {
  Eigen::Matrix3d G = Eigen::Matrix3d::Zero();  // G(i, j) = d_j v_i
  for (int a = 0; a < 6; ++a) {
    const int id = mesh.prisms[p][a];
    G += v.segment<3>(3 * id) * grad[a].transpose();
  }
  return G;
}

Eigen::Matrix3d skew(const Eigen::Matrix3d& G) { return 0.5 * (G - G.transpose()); }
Eigen::Matrix3d sym(const Eigen::Matrix3d& G) { return 0.5 * (G + G.transpose()); }

double bump(double s) { return std::abs(s) < 0.5 ? std::exp(-1.0 / (1.0 - 4.0 * s * s)) : 0.0; }

double bump_integral() {
  static const double c = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(bump, -0.5, 0.5, 15, 1e-14);
  return c;
}

double mollifier_slope(double s) {
  if (std::abs(s) >= 0.5) return 0.0;
  const double d = 1.0 - 4.0 * s * s;
  return mollifier(s) * (-8.0 * s / (d * d));
}

void check_full(const ChannelProblem& pb, const Eigen::VectorXd& v) {
  if (v.size() != pb.forms.grad.rows()) fail(ErrorKind::IncompatibleData, "field size does not match the mesh");
}

}  // namespace

double mollifier(double s) { return bump(s) / bump_integral(); }

KernelElement KernelElement::sine(int k) {
  if (k < 1) fail(ErrorKind::Domain, "sine mode index must be positive");
  const double w = k * kPi;
  return {[w](double z) { return std::sin(w * z); }, [w](double z) { return w * std::cos(w * z); }};
}

KernelElement KernelElement::hat(int n, int i) {
  if (n < 2 || i <= 0 || i >= n) fail(ErrorKind::Domain, "hat knot must be interior");
  const double dn = n;
  return {[dn, i](double z) { return std::max(0.0, 1.0 - std::abs(dn * z - i)); },
          [dn, i](double z) {
            const double s = dn * z - i;
            if (std::abs(s) >= 1.0 || s == 0.0) return 0.0;
            return s < 0.0 ? dn : -dn;
          }};
}

std::vector<KernelElement> hat_basis(int n_z) {
  std::vector<KernelElement> out;
  for (int i = 1; i < n_z; ++i) out.push_back(KernelElement::hat(n_z, i));
  return out;
}

ChannelProblem ChannelProblem::build(const ChannelGeometry& geom, const ChannelResolution& res) {
  ChannelProblem pb;
  pb.mesh = build_channel_mesh(geom, res.n_theta, res.n_rings, res.n_z);
  pb.forms = assemble_forms(pb.mesh);
  pb.bc = channel_constraints(pb.mesh);
  pb.grad = reduce(pb.forms.grad, pb.bc);
  pb.sym = reduce(pb.forms.sym, pb.bc);
  pb.mass = reduce(pb.forms.mass, pb.bc);
  return pb;
}

Eigen::VectorXd ChannelProblem::restrict(const Eigen::VectorXd& full) const {
  if (full.size() != bc.T.rows()) fail(ErrorKind::IncompatibleData, "field size does not match the mesh");
  return bc.T.transpose() * full;
}

Eigen::VectorXd ChannelProblem::expand(const Eigen::VectorXd& reduced) const {
  if (reduced.size() != bc.T.cols()) fail(ErrorKind::IncompatibleData, "reduced field has the wrong size");
  return bc.T * reduced;
}

KornEstimate thin_korn_constants(const ChannelProblem& pb, const EigenOptions& options) {
  KornEstimate k;
  k.epsilon = pb.mesh.epsilon;
  k.resolution = {0, 0, pb.mesh.n_z};
  k.dofs = pb.bc.reduced();
  const auto r1 = largest_generalized(pb.grad, pb.sym, options);
  const auto r2 = largest_generalized(pb.mass, pb.sym, options);
  k.ko1 = r1.values[0];
  k.ko2 = r2.values[0];
  k.ko1_field = pb.expand(r1.vectors[0]);
  k.ko2_field = pb.expand(r2.vectors[0]);
  k.iterations = r1.iterations + r2.iterations;
  return k;
}

KornEstimate thin_korn_constants(const ChannelGeometry& geom, const ChannelResolution& res,
                                 const EigenOptions& options) {
  auto k = thin_korn_constants(ChannelProblem::build(geom, res), options);
  k.resolution = res;
  return k;
}

BlowupData example_blowup_field(const KernelElement& q, const ChannelGeometry& geom) {
  if (geom.kind() != SectionKind::Circular) fail(ErrorKind::UnsupportedKind, "closed form needs circular sections");
  if (std::abs(q.theta(0.0)) > 1e-12 || std::abs(q.theta(1.0)) > 1e-12)
    fail(ErrorKind::IncompatibleData, "rotation profile must vanish at both caps");
  const double eps = geom.epsilon();
  // Radial Gauss (3 points, exact for the cubic radial integrands) and an
  // 8-point angular trapezoid (exact for degree <= 7 trigonometric terms).
  static const double gx[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  constexpr int kAngles = 8;
  struct Slice {
    double vol, sym, grad;
  };
  auto slice = [&](double z) {
    const double rho = eps * geom.radius(z);
    const Vec2 dX = eps * geom.centerline_slope(z);
    const double th = q.theta(z), thz = q.theta_z(z);
    Slice s{0.0, 0.0, 0.0};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < kAngles; ++j) {
        const double r = rho * gx[i], phi = 2.0 * kPi * j / kAngles;
        const double w = gw[i] * rho * r * (2.0 * kPi / kAngles);
        const Vec2 y(r * std::cos(phi), r * std::sin(phi));
        // d_z v_h = J (theta' y - theta eps X'); J is an isometry.
        const double dz2 = (thz * y - th * dX).squaredNorm();
        s.vol += w;
        s.sym += w * 0.5 * dz2;
        s.grad += w * (2.0 * th * th + dz2);
      }
    return s;
  };
  using G = boost::math::quadrature::gauss<double, 10>;
  constexpr int kPanels = 64;
  double vol = 0.0, s = 0.0, g = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double a = static_cast<double>(p) / kPanels, b = static_cast<double>(p + 1) / kPanels;
    vol += G::integrate([&](double z) { return slice(z).vol; }, a, b);
    s += G::integrate([&](double z) { return slice(z).sym; }, a, b);
    g += G::integrate([&](double z) { return slice(z).grad; }, a, b);
  }
  if (!(g > 0.0)) fail(ErrorKind::DegenerateInput, "rotation profile vanishes identically");
  BlowupData d;
  d.mean_sym = s / vol;
  d.mean_grad = g / vol;
  d.ratio = d.mean_sym / d.mean_grad;
  return d;
}

Eigen::VectorXd blowup_field_nodal(const KernelElement& q, const ChannelMesh& mesh) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(3 * mesh.size());
  for (int i = 0; i < mesh.size(); ++i) {
    const Vec3& x = mesh.nodes[i];
    const Vec2 y = Vec2(x.x(), x.y()) - mesh.centre[mesh.level[i]];
    const double th = q.theta(x.z());
    v[3 * i] = -th * y.y();
    v[3 * i + 1] = th * y.x();
  }
  return v;
}

double classical_korn_constant(const CrossSectionMesh& mesh, const EigenOptions& options) {
  const auto f = assemble_forms(mesh);
  const auto gauge = rigid_gauge(mesh);
  const SparseMatrix K = reduce(f.grad, gauge), S = reduce(f.sym, gauge);
  // c . v = int (d_x v_y - d_y v_x)
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * static_cast<int>(mesh.vertices.size()));
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto g = p1_gradients(mesh, t);
    const double a = mesh.triangle_area(t);
    for (int k = 0; k < 3; ++k) {
      const int id = mesh.triangles[t][k];
      c[2 * id] -= a * g[k].y();
      c[2 * id + 1] += a * g[k].x();
    }
  }
  const Eigen::VectorXd cr = gauge.T.transpose() * c;
  const double scale = 1.0 / (2.0 * mesh.total_area());
  // min_A int |grad v - A|^2 = int |grad v|^2 - (c . v)^2 / (2 |omega|)
  LinearOperator A = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd { return K * x - (scale * cr.dot(x)) * cr; };
  return largest_generalized(A, S, options).values[0];
}

double tangent_poincare_constant(const CrossSectionMesh& mesh, const EigenOptions& options) {
  const auto f = assemble_forms(mesh);
  const auto bc = tangency_constraints(mesh);
  return largest_generalized(reduce(f.mass, bc), reduce(f.grad, bc), options).values[0];
}

double normal_trace_bound(const Polygon& boundary) {
  Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
  double total = 0.0;
  const std::size_t n = boundary.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = boundary[(i + 1) % n] - boundary[i];
    const double L = e.norm();
    if (L == 0.0) continue;
    const Vec2 nrm(e.y() / L, -e.x() / L);
    M += L * nrm * nrm.transpose();
    total += L;
  }
  if (!(total > 0.0)) fail(ErrorKind::Domain, "boundary has zero length");
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(M).eigenvalues()[0];
}

ApproxSkewField approx_skew_field(const ChannelMesh& mesh, const Eigen::VectorXd& v, int spl) {
  if (v.size() != 3 * mesh.size()) fail(ErrorKind::IncompatibleData, "field size does not match the mesh");
  if (spl < 1) fail(ErrorKind::Domain, "samples_per_layer must be positive");
  const int nz = mesh.n_z;
  const std::size_t per_layer = mesh.prisms.size() / nz;
  const int ns = nz * spl;
  const double ds = 1.0 / ns;

  struct Point {
    int sample;
    double w;
    Eigen::Matrix3d G;
  };
  std::vector<Point> pts;
  pts.reserve(mesh.prisms.size() * 3 * spl);
  std::vector<Eigen::Matrix3d> tilde(ns, Eigen::Matrix3d::Zero());
  std::vector<double> area(ns, 0.0);
  double sym_int = 0.0, grad_int = 0.0;
  for (int k = 0; k < nz; ++k)
    for (int s = 0; s < spl; ++s) {
      const int idx = k * spl + s;
      const double zeta = (s + 0.5) / spl;
      for (std::size_t t = 0; t < per_layer; ++t) {
        const std::size_t p = k * per_layer + t;
        for (const auto& tp : kTriangleRule) {
          const auto e = eval_prism(mesh, p, tp[0], tp[1], zeta);
          const Eigen::Matrix3d G = nodal_gradient(mesh, p, e.grad, v);
          const double wh = e.det_h / 6.0;
          tilde[idx] += wh * skew(G);
          area[idx] += wh;
          const double w = e.det / 6.0 / spl;
          pts.push_back({idx, w, G});
          sym_int += w * sym(G).squaredNorm();
          grad_int += w * G.squaredNorm();
        }
      }
      tilde[idx] /= area[idx];
    }

  ApproxSkewField out;
  out.z.resize(ns);
  out.A.assign(ns, Eigen::Matrix3d::Zero());
  out.A_z.assign(ns, Eigen::Matrix3d::Zero());
  const double eps = mesh.epsilon;
  for (int i = 0; i < ns; ++i) out.z[i] = (i + 0.5) * ds;
  // Mollified mean; the mean is extended by zero outside [0, 1].
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) {
      const double d = (out.z[i] - out.z[j]) / eps;
      if (std::abs(d) >= 0.5) continue;
      out.A[i] += mollifier(d) / eps * ds * tilde[j];
      out.A_z[i] += mollifier_slope(d) / (eps * eps) * ds * tilde[j];
    }
  if (!(sym_int > 1e-14 * std::max(grad_int, 1e-300))) return out;
  out.defined = true;
  double num = 0.0;
  for (const auto& pt : pts) num += pt.w * (pt.G - out.A[pt.sample]).squaredNorm();
  double axial = 0.0;
  for (int i = 0; i < ns; ++i) axial += ds * (out.A[i].squaredNorm() + out.A_z[i].squaredNorm());
  out.ap1 = num / sym_int;
  out.ap2 = eps * eps * mesh.volume() * axial / sym_int;
  return out;
}

ConstrainedKorn optimal_korn_constant(const ChannelProblem& pb, const std::vector<KernelElement>& basis,
                                      const EigenOptions& options) {
  if (basis.empty()) fail(ErrorKind::IllPosedConstraint, "kernel basis is empty");
  Eigen::MatrixXd C(pb.bc.reduced(), static_cast<int>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Eigen::VectorXd vq = blowup_field_nodal(basis[i], pb.mesh);
    const Eigen::VectorXd kv = pb.forms.grad * vq;
    if (!(vq.dot(kv) > 0.0)) fail(ErrorKind::IllPosedConstraint, "kernel element has no gradient on this mesh");
    C.col(static_cast<int>(i)) = pb.restrict(kv);
  }
  const auto r = largest_generalized(pb.grad, pb.sym, options, &C);
  return {r.values[0], static_cast<int>(basis.size()), r.iterations};
}

double gradient_cosine(const ChannelProblem& pb, const Eigen::VectorXd& u, const Eigen::VectorXd& w) {
  check_full(pb, u);
  check_full(pb, w);
  const double uu = u.dot(pb.forms.grad * u), ww = w.dot(pb.forms.grad * w);
  if (!(uu > 0.0) || !(ww > 0.0)) fail(ErrorKind::DegenerateInput, "field has zero gradient");
  return u.dot(pb.forms.grad * w) / std::sqrt(uu * ww);
}

double ko2_composite_bound(const ChannelProblem& pb, const Eigen::VectorXd& v, double section_poincare) {
  check_full(pb, v);
  double axial = 0.0, horiz = 0.0, s = 0.0;
  for (std::size_t p = 0; p < pb.mesh.prisms.size(); ++p)
    for (const auto& q : prism_quadrature(pb.mesh, p)) {
      const Eigen::Matrix3d G = nodal_gradient(pb.mesh, p, q.grad, v);
      axial += q.weight * G(2, 2) * G(2, 2);
      horiz += q.weight * G.topLeftCorner<2, 2>().squaredNorm();
      s += q.weight * sym(G).squaredNorm();
    }
  if (!(s > 0.0)) fail(ErrorKind::DegenerateInput, "field has zero symmetric gradient");
  return (axial / (kPi * kPi) + section_poincare * horiz) / s;
}

}  // namespace nozzle
