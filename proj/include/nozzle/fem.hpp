#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <vector>

#include "nozzle/geometry.hpp"
#include "nozzle/mesh2d.hpp"

namespace nozzle {

using Vec3 = Eigen::Vector3d;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Prism mesh of Omega_eps: spider meshes of eps * omega(z_k) stacked on n_z + 1
// levels, one P1 x P1 prism per (triangle, layer). Node index = k * per_slice + i.
struct ChannelMesh {
  std::vector<Vec3> nodes;
  std::vector<std::array<int, 6>> prisms;  // bottom triangle, then top triangle
  int per_slice = 0;
  int n_z = 0;
  double epsilon = 1.0;
  std::vector<int> level;
  std::vector<char> lateral;         // on the lateral wall
  std::vector<Vec3> lateral_normal;  // outward unit normal at lateral nodes
  // Section centre at each level (physical coordinates).
  std::vector<Eigen::Vector2d> centre;

  int size() const { return static_cast<int>(nodes.size()); }
  bool cap(int node) const { return level[node] == 0 || level[node] == n_z; }
  double volume() const;
};

ChannelMesh build_channel_mesh(const ChannelGeometry& geom, int n_theta, int n_rings, int n_z);

// Vector-field forms, node-major DOF layout (node * d + component).
struct VectorForms {
  SparseMatrix grad;  // int grad u : grad v
  SparseMatrix sym;   // int sym grad u : sym grad v
  SparseMatrix mass;  // int u . v
};

VectorForms assemble_forms(const CrossSectionMesh& mesh);  // d = 2
VectorForms assemble_forms(const ChannelMesh& mesh);       // d = 3

// Columns span the admissible nodal values; x_full = T x_reduced.
struct ConstraintBasis {
  SparseMatrix T;
  int reduced() const { return static_cast<int>(T.cols()); }
};

// 3D wall conditions: v . n = 0 on lateral nodes, v = 0 on both caps.
ConstraintBasis channel_constraints(const ChannelMesh& mesh);
// 2D tangency v . n = 0 on boundary nodes (vertex normal from adjacent edges).
ConstraintBasis tangency_constraints(const CrossSectionMesh& mesh);
// 2D gauge removing rigid motions: node p0 fixed, one component of p1 fixed.
ConstraintBasis rigid_gauge(const CrossSectionMesh& mesh);

SparseMatrix reduce(const SparseMatrix& A, const ConstraintBasis& c);

// Nodal interpolation of a vector field.
Eigen::VectorXd interpolate(const ChannelMesh& mesh, const std::function<Vec3(const Vec3&)>& f);
Eigen::VectorXd interpolate(const CrossSectionMesh& mesh, const std::function<Vec2(const Vec2&)>& f);

// Full-space element data for quadrature of derived quantities.
struct QuadraturePoint {
  Vec3 x;
  double weight = 0.0;
  std::array<double, 6> value{};
  std::array<Vec3, 6> grad{};
};
struct PrismPoint {
  Vec3 x;
  double det = 0.0;    // volume Jacobian
  double det_h = 0.0;  // horizontal area Jacobian at fixed zeta
  std::array<double, 6> value{};
  std::array<Vec3, 6> grad{};
};
// Map and basis data at reference point (xi, eta) x zeta of prism p.
PrismPoint eval_prism(const ChannelMesh& mesh, std::size_t p, double xi, double eta, double zeta);
// Three-point triangle rule on the reference triangle (weights 1/6).
extern const double kTriangleRule[3][2];
// Six-point rule (3-point triangle x 2-point Gauss) on prism p.
std::array<QuadraturePoint, 6> prism_quadrature(const ChannelMesh& mesh, std::size_t p);

}  // namespace nozzle
