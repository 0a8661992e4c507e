#include "nozzle/fem.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "nozzle/errors.hpp"

namespace nozzle {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds the three vector forms of one element, given basis values and
// gradients at its quadrature points.
template <int D, int N>
void add_element(const std::array<int, N>& ids, const std::vector<double>& weights,
                 const std::vector<std::array<double, N>>& values,
                 const std::vector<std::array<Eigen::Matrix<double, D, 1>, N>>& grads, Triplets& g, Triplets& s,
                 Triplets& m) {
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b) {
      double gg = 0.0, mm = 0.0;
      Eigen::Matrix<double, D, D> cross = Eigen::Matrix<double, D, D>::Zero();
      for (std::size_t q = 0; q < weights.size(); ++q) {
        const double w = weights[q];
        gg += w * grads[q][a].dot(grads[q][b]);
        mm += w * values[q][a] * values[q][b];
        cross += w * grads[q][a] * grads[q][b].transpose();
      }
      for (int p = 0; p < D; ++p) {
        const int row = ids[a] * D + p;
        g.emplace_back(row, ids[b] * D + p, gg);
        m.emplace_back(row, ids[b] * D + p, mm);
        s.emplace_back(row, ids[b] * D + p, 0.5 * gg);
        // 1/2 d_q phi_a d_p phi_b couples component p of a with component q of b.
        for (int qc = 0; qc < D; ++qc) s.emplace_back(row, ids[b] * D + qc, 0.5 * cross(qc, p));
      }
    }
}

VectorForms finish(int n, const Triplets& g, const Triplets& s, const Triplets& m) {
  VectorForms f;
  f.grad.resize(n, n);
  f.sym.resize(n, n);
  f.mass.resize(n, n);
  f.grad.setFromTriplets(g.begin(), g.end());
  f.sym.setFromTriplets(s.begin(), s.end());
  f.mass.setFromTriplets(m.begin(), m.end());
  return f;
}

// Orthonormal basis of the plane orthogonal to n.
std::pair<Vec3, Vec3> tangent_pair(const Vec3& n) {
  const Vec3 seed = std::abs(n.z()) < 0.9 ? Vec3(0.0, 0.0, 1.0) : Vec3(1.0, 0.0, 0.0);
  const Vec3 t1 = (seed - seed.dot(n) * n).normalized();
  return {t1, n.cross(t1)};
}

}  // namespace

const double kTriangleRule[3][2] = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};

double ChannelMesh::volume() const {
  double v = 0.0;
  for (std::size_t p = 0; p < prisms.size(); ++p)
    for (const auto& q : prism_quadrature(*this, p)) v += q.weight;
  return v;
}

ChannelMesh build_channel_mesh(const ChannelGeometry& geom, int n_theta, int n_rings, int n_z) {
  if (n_theta < 3 || n_rings < 1 || n_z < 2) fail(ErrorKind::Domain, "channel mesh needs n_theta >= 3, n_rings >= 1, n_z >= 2");
  const double eps = geom.epsilon();
  ChannelMesh mesh;
  mesh.n_z = n_z;
  mesh.epsilon = eps;
  std::vector<CrossSectionMesh> slices;
  for (int k = 0; k <= n_z; ++k) {
    const double z = static_cast<double>(k) / n_z;
    Polygon poly = geom.section(z, n_theta);
    for (auto& p : poly) p *= eps;
    const Vec2 c = geom.kind() == SectionKind::Circular ? Vec2(eps * geom.centerline(z)) : polygon_centroid(poly);
    slices.push_back(spider_mesh(poly, c, n_rings));
    mesh.centre.push_back(c);
  }
  const int per = static_cast<int>(slices[0].vertices.size());
  for (const auto& s : slices)
    if (static_cast<int>(s.vertices.size()) != per) fail(ErrorKind::IncompatibleData, "sections differ in vertex count");
  mesh.per_slice = per;
  mesh.nodes.reserve(static_cast<std::size_t>(per) * (n_z + 1));
  for (int k = 0; k <= n_z; ++k)
    for (const auto& v : slices[k].vertices) {
      mesh.nodes.emplace_back(v.x(), v.y(), static_cast<double>(k) / n_z);
      mesh.level.push_back(k);
    }
  mesh.lateral.assign(mesh.nodes.size(), 0);
  mesh.lateral_normal.assign(mesh.nodes.size(), Vec3::Zero());
  const auto& ref = slices[0];
  for (int k = 0; k <= n_z; ++k) {
    const int km = std::max(k - 1, 0), kp = std::min(k + 1, n_z);
    const double dz = static_cast<double>(kp - km) / n_z;
    const auto& bv = slices[k].boundary_vertices;
    const int nb = static_cast<int>(bv.size());
    for (int j = 0; j < nb; ++j) {
      // Vertex normal: sum of the two adjacent edge normals.
      const auto& e0 = slices[k].boundary_edges[(j + nb - 1) % nb];
      const auto& e1 = slices[k].boundary_edges[j];
      const Vec2 nh = (e0.normal + e1.normal).normalized();
      const Vec2 dp = (slices[kp].vertices[bv[j]] - slices[km].vertices[bv[j]]) / dz;
      const int id = k * per + bv[j];
      mesh.lateral[id] = 1;
      mesh.lateral_normal[id] = Vec3(nh.x(), nh.y(), -nh.dot(dp)).normalized();
    }
  }
  for (int k = 0; k < n_z; ++k)
    for (const auto& t : ref.triangles)
      mesh.prisms.push_back({k * per + t[0], k * per + t[1], k * per + t[2], (k + 1) * per + t[0],
                             (k + 1) * per + t[1], (k + 1) * per + t[2]});
  return mesh;
}

PrismPoint eval_prism(const ChannelMesh& mesh, std::size_t p, double xi, double et, double ze) {
  const auto& ids = mesh.prisms[p];
  const double lam[3] = {1.0 - xi - et, xi, et};
  const double dl[3][2] = {{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}};
  PrismPoint out;
  std::array<Vec3, 6> dN{};
  for (int i = 0; i < 3; ++i) {
    out.value[i] = lam[i] * (1.0 - ze);
    out.value[i + 3] = lam[i] * ze;
    dN[i] = Vec3(dl[i][0] * (1.0 - ze), dl[i][1] * (1.0 - ze), -lam[i]);
    dN[i + 3] = Vec3(dl[i][0] * ze, dl[i][1] * ze, lam[i]);
  }
  Eigen::Matrix3d J = Eigen::Matrix3d::Zero();  // J(r, c) = d x_r / d ref_c
  out.x = Vec3::Zero();
  for (int a = 0; a < 6; ++a) {
    J += mesh.nodes[ids[a]] * dN[a].transpose();
    out.x += out.value[a] * mesh.nodes[ids[a]];
  }
  out.det = J.determinant();
  out.det_h = J.topLeftCorner<2, 2>().determinant();
  if (!(out.det > 0.0)) fail(ErrorKind::DegenerateGeometry, "inverted prism element");
  const Eigen::Matrix3d Jit = J.inverse().transpose();
  for (int a = 0; a < 6; ++a) out.grad[a] = Jit * dN[a];
  return out;
}

std::array<QuadraturePoint, 6> prism_quadrature(const ChannelMesh& mesh, std::size_t p) {
  static const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  std::array<QuadraturePoint, 6> out;
  int q = 0;
  for (int iz = 0; iz < 2; ++iz)
    for (const auto& tp : kTriangleRule) {
      const auto e = eval_prism(mesh, p, tp[0], tp[1], g[iz]);
      auto& qp = out[q++];
      qp.x = e.x;
      qp.weight = e.det / 6.0 * 0.5;
      qp.value = e.value;
      qp.grad = e.grad;
    }
  return out;
}

VectorForms assemble_forms(const CrossSectionMesh& mesh) {
  Triplets g, s, m;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto grads = p1_gradients(mesh, t);
    const double area = mesh.triangle_area(t);
    std::vector<double> w(3, area / 3.0);
    std::vector<std::array<double, 3>> vals;
    std::vector<std::array<Vec2, 3>> gr(3, grads);
    for (const auto& tp : kTriangleRule) vals.push_back({1.0 - tp[0] - tp[1], tp[0], tp[1]});
    add_element<2, 3>(mesh.triangles[t], w, vals, gr, g, s, m);
  }
  return finish(2 * static_cast<int>(mesh.vertices.size()), g, s, m);
}

VectorForms assemble_forms(const ChannelMesh& mesh) {
  Triplets g, s, m;
  g.reserve(mesh.prisms.size() * 108);
  s.reserve(mesh.prisms.size() * 432);
  m.reserve(mesh.prisms.size() * 108);
  for (std::size_t p = 0; p < mesh.prisms.size(); ++p) {
    const auto qs = prism_quadrature(mesh, p);
    std::vector<double> w;
    std::vector<std::array<double, 6>> vals;
    std::vector<std::array<Vec3, 6>> gr;
    for (const auto& q : qs) {
      w.push_back(q.weight);
      vals.push_back(q.value);
      gr.push_back(q.grad);
    }
    add_element<3, 6>(mesh.prisms[p], w, vals, gr, g, s, m);
  }
  return finish(3 * mesh.size(), g, s, m);
}

ConstraintBasis channel_constraints(const ChannelMesh& mesh) {
  Triplets t;
  int col = 0;
  for (int i = 0; i < mesh.size(); ++i) {
    if (mesh.cap(i)) continue;
    if (mesh.lateral[i]) {
      const auto [t1, t2] = tangent_pair(mesh.lateral_normal[i]);
      for (int c = 0; c < 3; ++c) {
        t.emplace_back(3 * i + c, col, t1[c]);
        t.emplace_back(3 * i + c, col + 1, t2[c]);
      }
      col += 2;
    } else {
      for (int c = 0; c < 3; ++c) t.emplace_back(3 * i + c, col++, 1.0);
    }
  }
  ConstraintBasis b;
  b.T.resize(3 * mesh.size(), col);
  b.T.setFromTriplets(t.begin(), t.end());
  return b;
}

ConstraintBasis tangency_constraints(const CrossSectionMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  std::vector<Vec2> normal(n, Vec2::Zero());
  std::vector<char> on_boundary(n, 0);
  for (const auto& e : mesh.boundary_edges) {
    normal[e.a] += e.normal;
    normal[e.b] += e.normal;
    on_boundary[e.a] = on_boundary[e.b] = 1;
  }
  Triplets t;
  int col = 0;
  for (int i = 0; i < n; ++i) {
    if (on_boundary[i]) {
      const Vec2 nn = normal[i].normalized();
      t.emplace_back(2 * i, col, -nn.y());
      t.emplace_back(2 * i + 1, col, nn.x());
      ++col;
    } else {
      t.emplace_back(2 * i, col++, 1.0);
      t.emplace_back(2 * i + 1, col++, 1.0);
    }
  }
  ConstraintBasis b;
  b.T.resize(2 * n, col);
  b.T.setFromTriplets(t.begin(), t.end());
  return b;
}

ConstraintBasis rigid_gauge(const CrossSectionMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  if (n < 2) fail(ErrorKind::DegenerateGeometry, "gauge needs two vertices");
  const int p0 = 0;
  int p1 = 1;
  for (int i = 1; i < n; ++i)
    if ((mesh.vertices[i] - mesh.vertices[p0]).norm() > (mesh.vertices[p1] - mesh.vertices[p0]).norm()) p1 = i;
  // A rotation about p0 moves p1 along J (p1 - p0); pin its larger component.
  const Vec2 d = mesh.vertices[p1] - mesh.vertices[p0];
  const int pinned = std::abs(d.x()) >= std::abs(d.y()) ? 2 * p1 + 1 : 2 * p1;
  Triplets t;
  int col = 0;
  for (int r = 0; r < 2 * n; ++r) {
    if (r == 2 * p0 || r == 2 * p0 + 1 || r == pinned) continue;
    t.emplace_back(r, col++, 1.0);
  }
  ConstraintBasis b;
  b.T.resize(2 * n, col);
  b.T.setFromTriplets(t.begin(), t.end());
  return b;
}

SparseMatrix reduce(const SparseMatrix& A, const ConstraintBasis& c) {
  SparseMatrix r = c.T.transpose() * A * c.T;
  r.prune(0.0);
  return r;
}

Eigen::VectorXd interpolate(const ChannelMesh& mesh, const std::function<Vec3(const Vec3&)>& f) {
  Eigen::VectorXd x(3 * mesh.size());
  for (int i = 0; i < mesh.size(); ++i) x.segment<3>(3 * i) = f(mesh.nodes[i]);
  return x;
}

Eigen::VectorXd interpolate(const CrossSectionMesh& mesh, const std::function<Vec2(const Vec2&)>& f) {
  const int n = static_cast<int>(mesh.vertices.size());
  Eigen::VectorXd x(2 * n);
  for (int i = 0; i < n; ++i) x.segment<2>(2 * i) = f(mesh.vertices[i]);
  return x;
}

}  // namespace nozzle
