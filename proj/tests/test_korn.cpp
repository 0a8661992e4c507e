#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nozzle/errors.hpp"
#include "nozzle/korn.hpp"
#include "oracles.hpp"

using namespace nozzle;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const LabError& e) {
    return e.kind();
  }
  return ErrorKind::Numerical;
}

ChannelGeometry straight(double eps) { return ChannelGeometry::circular({{1.0}}, {}, {}, eps); }

const ChannelResolution coarse{12, 3, 20};

// Dense diagonal test pencil.
SparseMatrix diag(const std::vector<double>& d) {
  SparseMatrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) m.insert(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

}  // namespace

TEST_CASE("lanczos: diagonal pencil, constraints and failures") {
  std::vector<double> a, b;
  for (int i = 1; i <= 60; ++i) {
    a.push_back(i);
    b.push_back(0.5 + 0.01 * i);
  }
  const auto A = diag(a), B = diag(b);
  EigenOptions o;
  o.n_eigs = 2;
  o.max_iter = 60;
  const auto r = largest_generalized(A, B, o);
  CHECK(r.values[0] == doctest::Approx(60.0 / 1.1).epsilon(1e-10));
  CHECK(r.values[1] == doctest::Approx(59.0 / 1.09).epsilon(1e-10));
  CHECK(rayleigh_quotient(A, B, r.vectors[0]) == doctest::Approx(r.values[0]).epsilon(1e-10));

  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(60, 1);
  C(59, 0) = 1.0;
  o.n_eigs = 1;
  CHECK(largest_generalized(A, B, o, &C).values[0] == doctest::Approx(59.0 / 1.09).epsilon(1e-10));
  Eigen::MatrixXd dup(60, 2);
  dup << C, 2.0 * C;
  CHECK(kind_of([&] { largest_generalized(A, B, o, &dup); }) == ErrorKind::IllPosedConstraint);

  b[3] = -1.0;
  CHECK(kind_of([&] { largest_generalized(A, diag(b), o); }) == ErrorKind::LinearSolver);
  CHECK(kind_of([&] { rayleigh_quotient(A, B, Eigen::VectorXd::Zero(60)); }) == ErrorKind::DegenerateInput);
}

TEST_CASE("channel forms: volume, rigid motions, mass") {
  const double eps = 0.4;
  const auto mesh = build_channel_mesh(straight(eps), 12, 3, 10);
  const double poly_area = 0.5 * 12 * std::sin(2 * pi / 12) * eps * eps;
  CHECK(mesh.volume() == doctest::Approx(poly_area).epsilon(1e-12));
  const auto f = assemble_forms(mesh);
  const auto trans = interpolate(mesh, [](const Vec3&) { return Vec3(1.0, -2.0, 0.5); });
  const auto rot = interpolate(mesh, [](const Vec3& x) { return Vec3(0.3, -0.2, 0.7).cross(x); });
  CHECK(trans.dot(f.grad * trans) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(rot.dot(f.sym * rot)) < 1e-12);
  CHECK(rot.dot(f.grad * rot) > 0.1 * mesh.volume());
  CHECK(trans.dot(f.mass * trans) == doctest::Approx(5.25 * poly_area).epsilon(1e-12));
  // A linear field has exact P1 x P1 gradients.
  const auto lin = interpolate(mesh, [](const Vec3& x) { return Vec3(x.z(), 0.0, 0.0); });
  CHECK(lin.dot(f.grad * lin) == doctest::Approx(poly_area).epsilon(1e-12));
  CHECK(lin.dot(f.sym * lin) == doctest::Approx(0.5 * poly_area).epsilon(1e-12));
}

TEST_CASE("kernel elements") {
  const auto h = KernelElement::hat(4, 2);
  CHECK(h.theta(0.5) == 1.0);
  CHECK(h.theta(0.375) == doctest::Approx(0.5));
  CHECK(h.theta(0.8) == 0.0);
  CHECK(h.theta_z(0.4) == 4.0);
  CHECK(h.theta_z(0.6) == -4.0);
  CHECK(hat_basis(5).size() == 4);
  CHECK(kind_of([] { KernelElement::hat(4, 4); }) == ErrorKind::Domain);
  CHECK(kind_of([] { KernelElement::sine(0); }) == ErrorKind::Domain);
  const auto s = KernelElement::sine(2);
  CHECK(s.theta_z(0.0) == doctest::Approx(2 * pi));
}

TEST_CASE("example field: closed form means") {
  for (double eps : {0.4, 0.2, 0.1}) {
    const auto d = example_blowup_field(KernelElement::sine(), straight(eps));
    CHECK(std::abs(d.mean_sym - eps * eps * pi * pi / 8) <= 1e-8);
    CHECK(std::abs(d.mean_grad - (1 + eps * eps * pi * pi / 4)) <= 1e-8);
    CHECK(d.lower_bound() == doctest::Approx(8 / (pi * pi * eps * eps) + 2).epsilon(1e-10));
  }
}

TEST_CASE("example field: flared, offset channel against disk-integral oracle") {
  const double eps = 0.3;
  const auto g = ChannelGeometry::circular({{1.0, 0.5}}, {{0.0, 0.2}}, {}, eps);
  const auto q = KernelElement::sine();
  // int_disk |t' y - t e X'|^2 = t'^2 pi rho^4 / 2 + t^2 e^2 |X'|^2 pi rho^2, X' = (0.2, 0)
  auto rho = [&](double z) { return eps * (1 + 0.5 * z); };
  auto dz2 = [&](double z) {
    const double t = std::sin(pi * z), tz = pi * std::cos(pi * z), r = rho(z);
    return tz * tz * pi * std::pow(r, 4) / 2 + t * t * eps * eps * 0.04 * pi * r * r;
  };
  const double vol = oracle::simpson([&](double z) { return pi * rho(z) * rho(z); }, 0, 1, 2000);
  const double sym = oracle::simpson([&](double z) { return 0.5 * dz2(z); }, 0, 1, 2000);
  const double grad = oracle::simpson(
      [&](double z) { return 2 * std::pow(std::sin(pi * z), 2) * pi * rho(z) * rho(z) + dz2(z); }, 0, 1, 2000);
  const auto d = example_blowup_field(q, g);
  CHECK(d.mean_sym == doctest::Approx(sym / vol).epsilon(1e-10));
  CHECK(d.mean_grad == doctest::Approx(grad / vol).epsilon(1e-10));
}

TEST_CASE("example field: input errors") {
  const KernelElement zero{[](double) { return 0.0; }, [](double) { return 0.0; }};
  const KernelElement open{[](double z) { return std::cos(z); }, [](double z) { return -std::sin(z); }};
  CHECK(kind_of([&] { example_blowup_field(zero, straight(0.2)); }) == ErrorKind::DegenerateInput);
  CHECK(kind_of([&] { example_blowup_field(open, straight(0.2)); }) == ErrorKind::IncompatibleData);
  const auto tab = ChannelGeometry::tabulated(std::vector<Polygon>(3, circle_polygon({0, 0}, 1, 16)), 0.2);
  CHECK(kind_of([&] { example_blowup_field(KernelElement::sine(), tab); }) == ErrorKind::UnsupportedKind);
}

TEST_CASE("example field interpolant is admissible and nearly attains the closed form") {
  const double eps = 0.2;
  const auto pb = ChannelProblem::build(straight(eps), coarse);
  const auto v = blowup_field_nodal(KernelElement::sine(), pb.mesh);
  CHECK((pb.expand(pb.restrict(v)) - v).norm() <= 1e-12 * v.norm());
  const double rq = rayleigh_quotient(pb.forms.grad, pb.forms.sym, v);
  CHECK(rq == doctest::Approx(example_blowup_field(KernelElement::sine(), straight(eps)).lower_bound()).epsilon(0.08));
}

TEST_CASE("normal trace bound") {
  CHECK(std::abs(normal_trace_bound(circle_polygon({0, 0}, 1.0, 200000)) - pi) <= 1e-8);
  CHECK(normal_trace_bound(Polygon{{0, 0}, {1, 0}, {1, 1}, {0, 1}}) == doctest::Approx(2.0).epsilon(1e-14));
  // Ellipse: the short axis direction sees less boundary.
  const double e = normal_trace_bound(ellipse_polygon({0, 0}, 2.0, 1.0, 4000));
  CHECK(e < normal_trace_bound(circle_polygon({0, 0}, 2.0, 4000)));
  CHECK(kind_of([] { normal_trace_bound(Polygon{{1, 1}, {1, 1}, {1, 1}}); }) == ErrorKind::Domain);
}

TEST_CASE("tangent Poincare constant: mesh stability and dilation") {
  const double c8 = tangent_poincare_constant(spider_mesh(circle_polygon({0, 0}, 1.0, 64), 8));
  const double c16 = tangent_poincare_constant(spider_mesh(circle_polygon({0, 0}, 1.0, 128), 16));
  CHECK(std::abs(c16 - c8) / c16 < 0.05);
  // The rigid rotation alone gives 1/4.
  CHECK(c16 > 0.25);
  for (double s : {0.3, 0.05}) {
    const double cs = tangent_poincare_constant(spider_mesh(circle_polygon({0, 0}, s, 64), 8));
    CHECK(cs / (s * s) == doctest::Approx(c8).epsilon(1e-7));
  }
}

TEST_CASE("classical Korn constant of the disk tends to 4") {
  const double k8 = classical_korn_constant(spider_mesh(circle_polygon({0, 0}, 1.0, 64), 8));
  const double k16 = classical_korn_constant(spider_mesh(circle_polygon({0, 0}, 1.0, 128), 16));
  CHECK(k16 == doctest::Approx(4.0).epsilon(0.01));
  CHECK(k8 < k16);
  const double shifted = classical_korn_constant(spider_mesh(circle_polygon({3, -1}, 0.1, 64), 8));
  CHECK(shifted == doctest::Approx(k8).epsilon(1e-7));
}

TEST_CASE("thin channel constants on a coarse mesh") {
  std::vector<double> eps{0.4, 0.2, 0.1}, ko1, ko2, opt;
  for (double e : eps) {
    const auto pb = ChannelProblem::build(straight(e), coarse);
    const auto k = thin_korn_constants(pb);
    ko1.push_back(k.ko1);
    ko2.push_back(k.ko2);
    opt.push_back(optimal_korn_constant(pb, hat_basis(coarse.n_z)).value);
    CHECK(k.ko1 >= example_blowup_field(KernelElement::sine(), straight(e)).lower_bound());
    // The rotation family alone reaches 2 / pi^2.
    CHECK(k.ko2 >= 0.97 * 2 / (pi * pi));
    if (e == 0.1) {
      const auto vq = blowup_field_nodal(KernelElement::sine(), pb.mesh);
      CHECK(std::abs(gradient_cosine(pb, k.ko1_field, vq)) > 0.9);
      CHECK(ko2_composite_bound(pb, k.ko2_field, 0.449 * e * e) * 2 >= k.ko2);
    }
  }
  const double slope = oracle::loglog_slope(eps, ko1);
  CHECK(slope == doctest::Approx(-2.0).epsilon(0.15));
  CHECK(*std::max_element(ko2.begin(), ko2.end()) <= 3 * *std::min_element(ko2.begin(), ko2.end()));
  CHECK(*std::max_element(opt.begin(), opt.end()) <= 3 * *std::min_element(opt.begin(), opt.end()));
  CHECK(opt.back() < 0.1 * ko1.back());
}

TEST_CASE("radial and axial fields are gradient-orthogonal to the rotation kernel") {
  const auto pb = ChannelProblem::build(straight(0.2), coarse);
  const auto vq = blowup_field_nodal(KernelElement::sine(), pb.mesh);
  const auto axial = interpolate(pb.mesh, [](const Vec3& x) { return Vec3(0, 0, std::sin(pi * x.z())); });
  const auto radial = interpolate(pb.mesh, [](const Vec3& x) -> Vec3 { return std::sin(pi * x.z()) * Vec3(x.x(), x.y(), 0); });
  CHECK(std::abs(gradient_cosine(pb, axial, vq)) < 1e-12);
  CHECK(std::abs(gradient_cosine(pb, radial, vq)) < 1e-12);
  CHECK(kind_of([&] { gradient_cosine(pb, Eigen::VectorXd::Zero(vq.size()), vq); }) == ErrorKind::DegenerateInput);
}

TEST_CASE("constrained constant: basis errors") {
  const auto pb = ChannelProblem::build(straight(0.2), {8, 2, 6});
  CHECK(kind_of([&] { optimal_korn_constant(pb, {}); }) == ErrorKind::IllPosedConstraint);
  auto dup = hat_basis(6);
  dup.push_back(KernelElement::hat(6, 2));
  CHECK(kind_of([&] { optimal_korn_constant(pb, dup); }) == ErrorKind::IllPosedConstraint);
  // A hat on a coarser grid is not a nodal hat but is still admissible.
  CHECK(optimal_korn_constant(pb, {KernelElement::hat(3, 1)}).value > 0.0);
}

TEST_CASE("skew-field approximation") {
  CHECK(oracle::simpson(mollifier, -0.5, 0.5, 4000) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mollifier(0.5) == 0.0);
  const double eps = 0.1;
  const auto pb = ChannelProblem::build(straight(eps), coarse);
  const auto vq = blowup_field_nodal(KernelElement::sine(), pb.mesh);
  const auto ap = approx_skew_field(pb.mesh, vq);
  REQUIRE(ap.defined);
  // grad v - A leaves the axial column d_z v_h, whose square is twice |sym grad v|^2.
  CHECK(ap.ap1 == doctest::Approx(2.0).epsilon(0.02));
  CHECK(ap.ap2 > 0.0);
  CHECK(ap.ap2 < 20.0);
  // The mollified mean recovers theta(z) J away from the caps.
  for (std::size_t i = 0; i < ap.z.size(); ++i)
    if (ap.z[i] > 0.1 && ap.z[i] < 0.9) CHECK(ap.A[i](1, 0) == doctest::Approx(std::sin(pi * ap.z[i])).epsilon(0.03));

  CHECK_FALSE(approx_skew_field(pb.mesh, Eigen::VectorXd::Zero(vq.size())).defined);
  const auto rigid = interpolate(pb.mesh, [](const Vec3& x) { return Vec3(-x.y(), x.x(), 0); });
  CHECK_FALSE(approx_skew_field(pb.mesh, rigid).defined);
  CHECK(kind_of([&] { approx_skew_field(pb.mesh, Eigen::VectorXd::Zero(5)); }) == ErrorKind::IncompatibleData);
}
