#include "nozzle/mesh2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "nozzle/errors.hpp"

namespace nozzle {

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  const double d1 = cross(q2 - q1, p1 - q1);
  const double d2 = cross(q2 - q1, p2 - q1);
  const double d3 = cross(p2 - p1, q1 - p1);
  const double d4 = cross(p2 - p1, q2 - p1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& x) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0 ? (x - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (a + t * ab - x).norm();
}

}  // namespace

double signed_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

Vec2 polygon_centroid(const Polygon& poly) {
  const std::size_t n = poly.size();
  double a = 0.0;
  Vec2 c = Vec2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    const double w = cross(p, q);
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

bool is_simple(const Polygon& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool contains(const Polygon& poly, const Vec2& x) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = (b.x() - a.x()) * (x.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (x.x() < xc) inside = !inside;
    }
  }
  return inside;
}

double boundary_distance(const Polygon& poly, const Vec2& x) {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) d = std::min(d, segment_distance(poly[i], poly[(i + 1) % n], x));
  return d;
}

Vec2 vertex_normal(const Polygon& poly, std::size_t j) {
  const std::size_t n = poly.size();
  const Vec2 chord = poly[(j + 1) % n] - poly[(j + n - 1) % n];
  return Vec2(chord.y(), -chord.x()).normalized();
}

double CrossSectionMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * cross(vertices[tri[1]] - vertices[tri[0]], vertices[tri[2]] - vertices[tri[0]]);
}

double CrossSectionMesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) a += triangle_area(t);
  return a;
}

void CrossSectionMesh::validate() const {
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    if (!(triangle_area(t) > 0.0)) fail(ErrorKind::DegenerateGeometry, "non-positive triangle area");
  }
  for (const auto& e : boundary_edges) {
    if (std::abs(e.normal.norm() - 1.0) > 1e-12)
      fail(ErrorKind::DegenerateGeometry, "boundary normal is not a unit vector");
  }
}

CrossSectionMesh spider_mesh(const Polygon& boundary, int n_rings) {
  return spider_mesh(boundary, polygon_centroid(boundary), n_rings);
}

CrossSectionMesh spider_mesh(const Polygon& boundary, const Vec2& center, int n_rings) {
  const int nb = static_cast<int>(boundary.size());
  if (nb < 3 || n_rings < 1) fail(ErrorKind::DegenerateGeometry, "spider mesh needs a polygon and rings");
  CrossSectionMesh mesh;
  mesh.vertices.push_back(center);
  for (int k = 1; k <= n_rings; ++k) {
    const double s = static_cast<double>(k) / n_rings;
    for (int j = 0; j < nb; ++j) mesh.vertices.push_back(center + s * (boundary[j] - center));
  }
  auto id = [nb](int ring, int j) { return 1 + (ring - 1) * nb + ((j % nb) + nb) % nb; };
  for (int j = 0; j < nb; ++j) mesh.triangles.push_back({0, id(1, j), id(1, j + 1)});
  for (int k = 1; k < n_rings; ++k) {
    for (int j = 0; j < nb; ++j) {
      const int a = id(k, j), b = id(k, j + 1), c = id(k + 1, j), d = id(k + 1, j + 1);
      // Alternate the diagonal so that the mesh has no preferred direction.
      if ((j + k) % 2 == 0) {
        mesh.triangles.push_back({a, c, d});
        mesh.triangles.push_back({a, d, b});
      } else {
        mesh.triangles.push_back({a, c, b});
        mesh.triangles.push_back({b, c, d});
      }
    }
  }
  for (int j = 0; j < nb; ++j) {
    const int a = id(n_rings, j), b = id(n_rings, j + 1);
    const Vec2 e = mesh.vertices[b] - mesh.vertices[a];
    mesh.boundary_edges.push_back({a, b, Vec2(e.y(), -e.x()).normalized()});
    mesh.boundary_vertices.push_back(a);
  }
  mesh.validate();
  return mesh;
}

std::array<Vec2, 3> p1_gradients(const CrossSectionMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const Vec2& p0 = mesh.vertices[tri[0]];
  const Vec2& p1 = mesh.vertices[tri[1]];
  const Vec2& p2 = mesh.vertices[tri[2]];
  const double twice = cross(p1 - p0, p2 - p0);
  // grad phi_i is the inward-rotated opposite edge over twice the area.
  auto g = [twice](const Vec2& a, const Vec2& b) -> Vec2 { return Vec2(a.y() - b.y(), b.x() - a.x()) / twice; };
  return {g(p1, p2), g(p2, p0), g(p0, p1)};
}

Polygon circle_polygon(const Vec2& center, double radius, int n_vertices) {
  return ellipse_polygon(center, radius, radius, n_vertices);
}

Polygon ellipse_polygon(const Vec2& center, double a, double b, int n_vertices) {
  Polygon p;
  p.reserve(n_vertices);
  for (int j = 0; j < n_vertices; ++j) {
    const double th = 2.0 * std::numbers::pi * j / n_vertices;
    p.emplace_back(center.x() + a * std::cos(th), center.y() + b * std::sin(th));
  }
  return p;
}

}  // namespace nozzle
