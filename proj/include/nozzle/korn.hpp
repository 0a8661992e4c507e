#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "nozzle/fem.hpp"
#include "nozzle/lanczos.hpp"

namespace nozzle {

struct ChannelResolution {
  int n_theta = 20;
  int n_rings = 6;
  int n_z = 40;
};

// Rotation profile Q(z) = theta(z) J in so(2), J x = (-y, x).
struct KernelElement {
  std::function<double(double)> theta;
  std::function<double(double)> theta_z;

  static KernelElement sine(int k = 1);
  // Piecewise-linear hat at knot i of the uniform grid k / n, 0 < i < n.
  static KernelElement hat(int n, int i);
};

// ko1 = max int |grad v|^2 / int |sym grad v|^2 and ko2 = max int |v|^2 / int |sym grad v|^2
// over fields with v.n = 0 on the lateral wall and v = 0 on the caps.
struct KornEstimate {
  double epsilon = 0.0;
  double ko1 = 0.0;
  double ko2 = 0.0;
  ChannelResolution resolution;
  int dofs = 0;
  Eigen::VectorXd ko1_field;  // full nodal vector
  Eigen::VectorXd ko2_field;
  int iterations = 0;
};

// Assembled channel problem, reused across the experiments on one mesh.
struct ChannelProblem {
  ChannelMesh mesh;
  VectorForms forms;
  ConstraintBasis bc;
  SparseMatrix grad, sym, mass;  // reduced

  static ChannelProblem build(const ChannelGeometry& geom, const ChannelResolution& res);
  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
};

KornEstimate thin_korn_constants(const ChannelGeometry& geom, const ChannelResolution& res,
                                 const EigenOptions& options = {});
KornEstimate thin_korn_constants(const ChannelProblem& problem, const EigenOptions& options = {});

// Closed-form Rayleigh data of v = (Q(z)(x_h - eps X(z)), 0) on a circular channel,
// integrated by quadrature.
struct BlowupData {
  double mean_sym = 0.0;   // mean over Omega_eps of |sym grad v|^2
  double mean_grad = 0.0;  // mean of |grad v|^2
  double ratio = 0.0;      // mean_sym / mean_grad
  double lower_bound() const { return mean_grad / mean_sym; }
};
BlowupData example_blowup_field(const KernelElement& q, const ChannelGeometry& geom);
// Nodal interpolant of the same field.
Eigen::VectorXd blowup_field_nodal(const KernelElement& q, const ChannelMesh& mesh);

// Classical Korn constant of a planar domain: max over v of
// min_A int |grad v - A|^2 / int |sym grad v|^2, rigid motions factored out.
double classical_korn_constant(const CrossSectionMesh& mesh, const EigenOptions& options = {});

// max int |v|^2 / int |grad v|^2 over tangent fields on the section.
double tangent_poincare_constant(const CrossSectionMesh& mesh, const EigenOptions& options = {});

// min over unit a of the boundary integral of (a.n)^2.
double normal_trace_bound(const Polygon& boundary);

// Residuals of the skew-field approximation for a nodal field on the channel.
struct ApproxSkewField {
  std::vector<double> z;
  std::vector<Eigen::Matrix3d> A, A_z;
  double ap1 = 0.0;  // int |grad v - A(z)|^2 / int |sym grad v|^2
  double ap2 = 0.0;  // eps^2 |Omega| int_0^1 (|A|^2 + |A'|^2) dz / int |sym grad v|^2
  bool defined = false;  // false when int |sym grad v|^2 vanishes
};
ApproxSkewField approx_skew_field(const ChannelMesh& mesh, const Eigen::VectorXd& v, int samples_per_layer = 8);
// Unit-integral bump supported in (-1/2, 1/2).
double mollifier(double s);

// ko1 over fields orthogonal (in the gradient inner product) to the kernel
// fields v_Q for each Q in the basis: the alpha = 0 form of the angle condition.
struct ConstrainedKorn {
  double value = 0.0;
  int constraints = 0;
  int iterations = 0;
};
ConstrainedKorn optimal_korn_constant(const ChannelProblem& problem, const std::vector<KernelElement>& basis,
                                      const EigenOptions& options = {});
// Nodal hats at every interior level of the mesh.
std::vector<KernelElement> hat_basis(int n_z);

// int grad u : grad w / (|grad u| |grad w|) for nodal fields.
double gradient_cosine(const ChannelProblem& problem, const Eigen::VectorXd& u, const Eigen::VectorXd& w);

// Composite bound on a field: 1D Poincare on v_z plus the slice-wise tangent
// Poincare constant of the scaled section eps * omega on v_h, relative to
// int |sym grad v|^2.
double ko2_composite_bound(const ChannelProblem& problem, const Eigen::VectorXd& v, double section_poincare);

}  // namespace nozzle
