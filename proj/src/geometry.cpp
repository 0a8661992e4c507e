#include "nozzle/geometry.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nozzle/errors.hpp"

namespace nozzle {

double Polynomial::operator()(double z) const {
  double s = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) s = s * z + *it;
  return s;
}

double Polynomial::derivative(double z) const {
  double s = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 1;) s = s * z + static_cast<double>(k) * coeffs[k];
  return s;
}

double Polynomial::second_derivative(double z) const {
  double s = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 2;) s = s * z + static_cast<double>(k * (k - 1)) * coeffs[k];
  return s;
}

bool Polynomial::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return c == 0.0; });
}

ChannelGeometry ChannelGeometry::circular(Polynomial radius, Polynomial centerline_x,
                                          Polynomial centerline_y, double epsilon, int n_z_samples) {
  if (!(epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
  if (n_z_samples < 2) fail(ErrorKind::Domain, "n_z_samples must be at least 2");
  ChannelGeometry g;
  g.kind_ = SectionKind::Circular;
  g.radius_ = std::move(radius);
  g.cx_ = std::move(centerline_x);
  g.cy_ = std::move(centerline_y);
  g.epsilon_ = epsilon;
  g.n_z_samples_ = n_z_samples;
  double r_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 4 * n_z_samples; ++k) r_min = std::min(r_min, g.radius_(0.25 * k / n_z_samples));
  if (!(r_min > 0.0)) fail(ErrorKind::DegenerateGeometry, "radius must stay positive on [0,1]");
  return g;
}

ChannelGeometry ChannelGeometry::tabulated(std::vector<Polygon> sections, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
  if (sections.size() < 3) fail(ErrorKind::Domain, "tabulated geometry needs at least 3 z-slices");
  const std::size_t nv = sections.front().size();
  if (nv < 16) fail(ErrorKind::DegenerateGeometry, "sections need at least 16 boundary vertices");
  int orientation = 0;
  for (auto& poly : sections) {
    if (poly.size() != nv) fail(ErrorKind::IncompatibleData, "sections must have matched vertex counts");
    if (!is_simple(poly)) fail(ErrorKind::DegenerateGeometry, "section boundary is self-intersecting");
    const double a = signed_area(poly);
    if (a == 0.0) fail(ErrorKind::DegenerateGeometry, "section has zero area");
    const int o = a > 0 ? 1 : -1;
    if (orientation != 0 && o != orientation)
      fail(ErrorKind::IncompatibleData, "sections have inconsistent orientation");
    orientation = o;
  }
  if (orientation < 0) {
    // Reverse while keeping vertex 0 in place so the matching survives.
    for (auto& poly : sections) std::reverse(poly.begin() + 1, poly.end());
  }
  ChannelGeometry g;
  g.kind_ = SectionKind::Tabulated;
  g.sections_ = std::move(sections);
  g.epsilon_ = epsilon;
  g.n_z_samples_ = static_cast<int>(g.sections_.size()) - 1;
  // Discrete C^1 proxy: vertex slopes must stay bounded relative to the section size.
  const double dz = g.dz();
  for (std::size_t k = 0; k + 1 < g.sections_.size(); ++k) {
    const double scale = std::sqrt(std::abs(signed_area(g.sections_[k])));
    for (std::size_t j = 0; j < nv; ++j) {
      const double slope = (g.sections_[k + 1][j] - g.sections_[k][j]).norm() / dz;
      if (!std::isfinite(slope) || slope > 1e3 * scale)
        fail(ErrorKind::DegenerateGeometry, "boundary slope is unbounded between slices");
    }
  }
  return g;
}

void ChannelGeometry::check_z(double z) const {
  if (!(z >= 0.0 && z <= 1.0)) {
    std::ostringstream os;
    os << "z = " << z << " outside [0,1]";
    fail(ErrorKind::Domain, os.str());
  }
}

double ChannelGeometry::radius(double z) const {
  if (kind_ != SectionKind::Circular) fail(ErrorKind::UnsupportedKind, "radius needs a circular channel");
  return radius_(z);
}

double ChannelGeometry::radius_slope(double z) const {
  if (kind_ != SectionKind::Circular) fail(ErrorKind::UnsupportedKind, "radius needs a circular channel");
  return radius_.derivative(z);
}

Vec2 ChannelGeometry::centerline(double z) const {
  if (kind_ == SectionKind::Circular) return Vec2(cx_(z), cy_(z));
  return polygon_centroid(section(z));
}

Vec2 ChannelGeometry::centerline_slope(double z) const {
  if (kind_ != SectionKind::Circular) fail(ErrorKind::UnsupportedKind, "centerline slope needs a circular channel");
  return Vec2(cx_.derivative(z), cy_.derivative(z));
}

Polygon ChannelGeometry::section(double z, int n_vertices_circular) const {
  check_z(z);
  if (kind_ == SectionKind::Circular) return circle_polygon(centerline(z), radius_(z), n_vertices_circular);
  const double s = z * n_z_samples_;
  const int k = std::min(static_cast<int>(s), n_z_samples_ - 1);
  const double th = s - k;
  Polygon p(sections_[k].size());
  for (std::size_t j = 0; j < p.size(); ++j) p[j] = (1.0 - th) * sections_[k][j] + th * sections_[k + 1][j];
  return p;
}

bool ChannelGeometry::section_contains(const Vec2& x, double z, double tol) const {
  if (kind_ == SectionKind::Circular) return (x - centerline(z)).norm() <= radius_(z) + tol;
  const Polygon p = section(z);
  return contains(p, x) || boundary_distance(p, x) <= tol;
}

double ChannelGeometry::section_boundary_distance(const Vec2& x, double z) const {
  if (kind_ == SectionKind::Circular) return std::abs((x - centerline(z)).norm() - radius_(z));
  return boundary_distance(section(z), x);
}

double area(const ChannelGeometry& geom, double z) {
  if (!(z >= 0.0 && z <= 1.0)) fail(ErrorKind::Domain, "area: z outside [0,1]");
  if (geom.kind() == SectionKind::Circular) {
    const double r = geom.radius(z);
    return std::numbers::pi * r * r;
  }
  return signed_area(geom.section(z));
}

namespace {

// Second-order differences on the sample grid, three-point one-sided at the ends.
std::vector<double> grid_derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t k = 1; k + 1 < n; ++k) d[k] = (f[k + 1] - f[k - 1]) / (2.0 * h);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

double interpolate_on_grid(const std::vector<double>& d, double z) {
  const int n = static_cast<int>(d.size()) - 1;
  const double s = z * n;
  const int k = std::min(static_cast<int>(s), n - 1);
  const double th = s - k;
  return (1.0 - th) * d[k] + th * d[k + 1];
}

std::vector<double> sample_areas(const ChannelGeometry& geom) {
  std::vector<double> a(geom.n_z_samples() + 1);
  for (int k = 0; k <= geom.n_z_samples(); ++k) a[k] = area(geom, geom.z_sample(k));
  return a;
}

}  // namespace

double area_slope(const ChannelGeometry& geom, double z, DerivativeRule rule) {
  if (!(z >= 0.0 && z <= 1.0)) fail(ErrorKind::Domain, "area_slope: z outside [0,1]");
  if (rule == DerivativeRule::Analytic) {
    if (geom.kind() != SectionKind::Circular)
      fail(ErrorKind::UnsupportedKind, "analytic derivatives need a circular channel");
    return 2.0 * std::numbers::pi * geom.radius(z) * geom.radius_slope(z);
  }
  return interpolate_on_grid(grid_derivative(sample_areas(geom), geom.dz()), z);
}

namespace detail {

struct TiltImpl {
  virtual ~TiltImpl() = default;
  virtual Vec2 eval(const Vec2& x, double z) const = 0;
  virtual double divergence(double z) const = 0;
  virtual TiltField::Provenance provenance() const = 0;
  virtual const std::vector<NeumannSliceReport>* report() const { return nullptr; }
};

namespace {

struct CircularTilt final : TiltImpl {
  explicit CircularTilt(ChannelGeometry g) : geom(std::move(g)) {}
  Vec2 eval(const Vec2& x, double z) const override {
    const double r = geom.radius(z);
    return geom.radius_slope(z) / r * (x - geom.centerline(z)) + geom.centerline_slope(z);
  }
  double divergence(double z) const override { return 2.0 * geom.radius_slope(z) / geom.radius(z); }
  TiltField::Provenance provenance() const override { return TiltField::Provenance::ClosedForm; }
  ChannelGeometry geom;
};

struct NeumannTilt final : TiltImpl {
  std::vector<CrossSectionMesh> meshes;   // one per sample slice, shared topology
  std::vector<std::vector<Vec2>> values;  // nodal V per slice
  std::vector<double> div;
  std::vector<NeumannSliceReport> reports;

  Vec2 eval(const Vec2& x, double z) const override {
    const int n = static_cast<int>(meshes.size()) - 1;
    const double s = std::clamp(z, 0.0, 1.0) * n;
    const int k = std::min(static_cast<int>(s), n - 1);
    const double th = s - k;
    const auto& m0 = meshes[k];
    const auto& m1 = meshes[k + 1];
    auto pos = [&](int i) -> Vec2 { return (1.0 - th) * m0.vertices[i] + th * m1.vertices[i]; };
    auto val = [&](int i) -> Vec2 { return (1.0 - th) * values[k][i] + th * values[k + 1][i]; };
    // Least-outside triangle: exact containment gives min barycentric >= 0.
    double best = -std::numeric_limits<double>::infinity();
    Vec2 result = Vec2::Zero();
    for (const auto& tri : m0.triangles) {
      const Vec2 a = pos(tri[0]), b = pos(tri[1]), c = pos(tri[2]);
      const double det = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
      const Vec2 d = x - a;
      const double l1 = (d.x() * (c - a).y() - d.y() * (c - a).x()) / det;
      const double l2 = ((b - a).x() * d.y() - (b - a).y() * d.x()) / det;
      const double l0 = 1.0 - l1 - l2;
      const double m = std::min({l0, l1, l2});
      if (m > best) {
        best = m;
        result = l0 * val(tri[0]) + l1 * val(tri[1]) + l2 * val(tri[2]);
        if (m >= 0.0) break;
      }
    }
    return result;
  }
  double divergence(double z) const override { return interpolate_on_grid(div, std::clamp(z, 0.0, 1.0)); }
  TiltField::Provenance provenance() const override { return TiltField::Provenance::NeumannSolved; }
  const std::vector<NeumannSliceReport>* report() const override { return &reports; }
};

}  // namespace
}  // namespace detail

Vec2 TiltField::operator()(const Vec2& x, double z) const { return scale_ * impl_->eval(x / scale_, z); }
double TiltField::divergence(double z) const { return impl_->divergence(z); }
TiltField::Provenance TiltField::provenance() const { return impl_->provenance(); }
const std::vector<NeumannSliceReport>* TiltField::neumann_report() const { return impl_->report(); }
TiltField TiltField::scaled(double factor) const { return TiltField(impl_, scale_ * factor); }

TiltField tilt_field_circular(const ChannelGeometry& geom) {
  if (geom.kind() != SectionKind::Circular)
    fail(ErrorKind::UnsupportedKind, "closed-form tilt field needs a circular channel");
  return TiltField(std::make_shared<detail::CircularTilt>(geom), 1.0);
}

namespace {

struct SliceSolution {
  std::vector<Vec2> values;
  NeumannSliceReport report;
};

// P1 solve of  Lap U = f,  dU/dn = g  with f made exactly compatible, then
// gradient recovery; boundary normals get the prescribed flux.
SliceSolution solve_slice(const CrossSectionMesh& mesh, const Polygon& poly,
                          const std::vector<Vec2>& vertex_velocity, double area_value,
                          double area_rate, double compat_tol) {
  const int nv = static_cast<int>(mesh.vertices.size());
  const int nb = static_cast<int>(poly.size());
  SliceSolution out;
  out.values.assign(nv, Vec2::Zero());

  Eigen::VectorXd load = Eigen::VectorXd::Zero(nv);
  double flux = 0.0;
  for (int e = 0; e < nb; ++e) {
    const auto& edge = mesh.boundary_edges[e];
    const double len = (mesh.vertices[edge.b] - mesh.vertices[edge.a]).norm();
    const double ga = vertex_velocity[e].dot(edge.normal);
    const double gb = vertex_velocity[(e + 1) % nb].dot(edge.normal);
    load[edge.a] += len * (2.0 * ga + gb) / 6.0;
    load[edge.b] += len * (ga + 2.0 * gb) / 6.0;
    flux += 0.5 * len * (ga + gb);
  }
  const double residual = std::abs(area_value * (area_rate / area_value) - flux);
  out.report.compatibility_residual = residual;
  if (residual > compat_tol * std::max(std::abs(area_rate), area_value)) {
    std::ostringstream os;
    os << "Neumann compatibility residual " << residual << " exceeds tolerance";
    fail(ErrorKind::IncompatibleData, os.str());
  }
  const double f = flux / area_value;

  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double at = mesh.triangle_area(t);
    const auto g = p1_gradients(mesh, t);
    for (int a = 0; a < 3; ++a) {
      load[tri[a]] -= f * at / 3.0;
      for (int b = 0; b < 3; ++b) {
        if (tri[a] == 0 || tri[b] == 0) continue;  // pinned gauge node
        trip.emplace_back(tri[a] - 1, tri[b] - 1, at * g[a].dot(g[b]));
      }
    }
  }
  Eigen::SparseMatrix<double> k(nv - 1, nv - 1);
  k.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(k);
  if (solver.info() != Eigen::Success || (solver.vectorD().array() <= 0.0).any())
    fail(ErrorKind::DegenerateGeometry, "singular stiffness matrix in the Neumann problem");
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nv);
  u.tail(nv - 1) = solver.solve(load.tail(nv - 1));
  // Zero-mean gauge.
  double mean = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    mean += mesh.triangle_area(t) * (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
  }
  u.array() -= mean / area_value;

  std::vector<double> weight(nv, 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double at = mesh.triangle_area(t);
    const auto g = p1_gradients(mesh, t);
    const Vec2 grad = u[tri[0]] * g[0] + u[tri[1]] * g[1] + u[tri[2]] * g[2];
    for (int a = 0; a < 3; ++a) {
      out.values[tri[a]] += at * grad;
      weight[tri[a]] += at;
    }
  }
  for (int i = 0; i < nv; ++i) out.values[i] /= weight[i];

  double tangency = 0.0;
  for (int j = 0; j < nb; ++j) {
    const int i = mesh.boundary_vertices[j];
    const Vec2 n = vertex_normal(poly, j);
    const Vec2 tau(-n.y(), n.x());
    const double g = vertex_velocity[j].dot(n);
    tangency = std::max(tangency, std::abs(out.values[i].dot(n) - g));
    out.values[i] = out.values[i].dot(tau) * tau + g * n;
  }
  out.report.tangency_residual = tangency;

  double sum = 0.0, sum2 = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double at = mesh.triangle_area(t);
    const auto g = p1_gradients(mesh, t);
    const double d = out.values[tri[0]].dot(g[0]) + out.values[tri[1]].dot(g[1]) + out.values[tri[2]].dot(g[2]);
    sum += at * d;
    sum2 += at * d * d;
  }
  const double a_mesh = mesh.total_area();
  out.report.divergence_mean = sum / a_mesh;
  out.report.divergence_std = std::sqrt(std::max(0.0, sum2 / a_mesh - std::pow(sum / a_mesh, 2)));
  return out;
}

}  // namespace

TiltField tilt_field_neumann(const ChannelGeometry& geom, const NeumannOptions& options) {
  if (geom.kind() != SectionKind::Tabulated)
    fail(ErrorKind::UnsupportedKind, "Neumann tilt construction needs a tabulated channel");
  const auto& sections = geom.sections();
  const int ns = static_cast<int>(sections.size());
  const int nv = static_cast<int>(sections.front().size());
  const double dz = geom.dz();

  std::vector<std::vector<Vec2>> velocity(ns, std::vector<Vec2>(nv));
  for (int j = 0; j < nv; ++j) {
    for (int k = 0; k < ns; ++k) {
      if (k == 0)
        velocity[k][j] = (-3.0 * sections[0][j] + 4.0 * sections[1][j] - sections[2][j]) / (2.0 * dz);
      else if (k == ns - 1)
        velocity[k][j] = (3.0 * sections[k][j] - 4.0 * sections[k - 1][j] + sections[k - 2][j]) / (2.0 * dz);
      else
        velocity[k][j] = (sections[k + 1][j] - sections[k - 1][j]) / (2.0 * dz);
    }
  }
  std::vector<double> areas(ns);
  for (int k = 0; k < ns; ++k) areas[k] = signed_area(sections[k]);
  const std::vector<double> rates = grid_derivative(areas, dz);

  auto impl = std::make_shared<detail::NeumannTilt>();
  for (int k = 0; k < ns; ++k) {
    impl->meshes.push_back(spider_mesh(sections[k], options.n_rings));
    SliceSolution s = solve_slice(impl->meshes.back(), sections[k], velocity[k], areas[k], rates[k],
                                  options.compatibility_tol);
    s.report.z = geom.z_sample(k);
    impl->values.push_back(std::move(s.values));
    impl->div.push_back(s.report.divergence_mean);
    impl->reports.push_back(s.report);
  }
  return TiltField(impl, 1.0);
}

TiltField scale_to_epsilon(const TiltField& tilt, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorKind::Domain, "epsilon must be positive");
  return tilt.scaled(epsilon);
}

double check_divergence_identity(const ChannelGeometry& geom, const TiltField& tilt, DerivativeRule rule) {
  double worst = 0.0;
  for (int k = 0; k <= geom.n_z_samples(); ++k) {
    const double z = geom.z_sample(k);
    const double a = area(geom, z);
    worst = std::max(worst, std::abs(a * tilt.divergence(z) - area_slope(geom, z, rule)));
  }
  return worst;
}

Vec2 flow_map(const ChannelGeometry& geom, const TiltField& tilt, const Vec2& x0, double z_end,
              const FlowOptions& options) {
  if (!(z_end >= 0.0 && z_end <= 1.0)) fail(ErrorKind::Domain, "flow_map: z_end outside [0,1]");
  const int per_unit = options.n_steps > 0 ? options.n_steps : geom.n_z_samples();
  const int steps = std::max(1, static_cast<int>(std::ceil(z_end * per_unit - 1e-12)));
  const double h = z_end / steps;
  const double s = tilt.scale();
  Vec2 x = x0;
  for (int i = 0; i < steps; ++i) {
    const double z = i * h;
    const Vec2 k1 = tilt(x, z);
    const Vec2 k2 = tilt(x + 0.5 * h * k1, z + 0.5 * h);
    const Vec2 k3 = tilt(x + 0.5 * h * k2, z + 0.5 * h);
    const Vec2 k4 = tilt(x + h * k3, z + h);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double zn = (i + 1 == steps) ? z_end : (i + 1) * h;
    if (!geom.section_contains(x / s, zn, options.escape_tol)) {
      std::ostringstream os;
      os << "trajectory left the channel at z = " << zn;
      fail(ErrorKind::FlowEscape, os.str());
    }
  }
  return x;
}

namespace {

Polygon resample(const Polygon& poly, int n) {
  const std::size_t m = poly.size();
  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t i = 0; i < m; ++i) cum[i + 1] = cum[i] + (poly[(i + 1) % m] - poly[i]).norm();
  Polygon out;
  std::size_t e = 0;
  for (int k = 0; k < n; ++k) {
    const double s = cum[m] * k / n;
    while (e + 1 < m && cum[e + 1] <= s) ++e;
    const double t = (s - cum[e]) / (cum[e + 1] - cum[e]);
    out.push_back((1.0 - t) * poly[e] + t * poly[(e + 1) % m]);
  }
  return out;
}

}  // namespace

double flow_reconstruction_error(const ChannelGeometry& geom, const TiltField& tilt, double z,
                                 int n_samples, const FlowOptions& options) {
  const double s = tilt.scale();
  Polygon start = resample(geom.section(0.0, n_samples), n_samples);
  Polygon mapped;
  for (const auto& p : start) mapped.push_back(flow_map(geom, tilt, s * p, z, options) / s);
  double d = 0.0;
  for (const auto& p : mapped) d = std::max(d, geom.section_boundary_distance(p, z));
  for (const auto& q : resample(geom.section(z, n_samples), n_samples)) d = std::max(d, boundary_distance(mapped, q));
  return d;
}

}  // namespace nozzle
