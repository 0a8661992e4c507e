#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace nozzle {

using Vec2 = Eigen::Vector2d;

// Closed polygon, vertices in counter-clockwise order, last vertex not repeated.
using Polygon = std::vector<Vec2>;

double signed_area(const Polygon& poly);
Vec2 polygon_centroid(const Polygon& poly);
bool is_simple(const Polygon& poly);
bool contains(const Polygon& poly, const Vec2& x);
double boundary_distance(const Polygon& poly, const Vec2& x);
// Outward unit normal at vertex j, from the chord between its neighbours.
Vec2 vertex_normal(const Polygon& poly, std::size_t j);

struct BoundaryEdge {
  int a = 0;
  int b = 0;
  Vec2 normal = Vec2::Zero();
};

struct CrossSectionMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  // Indices of boundary vertices in polygon order.
  std::vector<int> boundary_vertices;

  double triangle_area(std::size_t t) const;
  double total_area() const;
  // Throws DegenerateGeometry if any triangle is inverted or flat.
  void validate() const;
};

// Rings of scaled copies of a star-shaped polygon around its centroid.
// All meshes built from polygons with equal vertex counts share one topology.
CrossSectionMesh spider_mesh(const Polygon& boundary, int n_rings);

// Same construction with an explicit center; used to keep topology and
// vertex correspondence across z-slices.
CrossSectionMesh spider_mesh(const Polygon& boundary, const Vec2& center, int n_rings);

// Gradients of the three P1 basis functions on triangle t.
std::array<Vec2, 3> p1_gradients(const CrossSectionMesh& mesh, std::size_t t);

Polygon circle_polygon(const Vec2& center, double radius, int n_vertices);
Polygon ellipse_polygon(const Vec2& center, double a, double b, int n_vertices);

}  // namespace nozzle
