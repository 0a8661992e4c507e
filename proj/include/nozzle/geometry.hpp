#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nozzle/mesh2d.hpp"

namespace nozzle {

// c[0] + c[1] z + c[2] z^2 + ...
struct Polynomial {
  std::vector<double> coeffs;

  double operator()(double z) const;
  double derivative(double z) const;
  double second_derivative(double z) const;
  bool is_zero() const;
};

enum class SectionKind { Circular, Tabulated };

// Rule for dA/dz and dR/dz: closed form, or differences over the sample grid.
enum class DerivativeRule { Analytic, SampleGrid };

class ChannelGeometry {
 public:
  static ChannelGeometry circular(Polynomial radius, Polynomial centerline_x = {},
                                  Polynomial centerline_y = {}, double epsilon = 1.0,
                                  int n_z_samples = 64);
  // sections[k] is the boundary of the section at z = k / (sections.size() - 1).
  static ChannelGeometry tabulated(std::vector<Polygon> sections, double epsilon = 1.0);

  SectionKind kind() const { return kind_; }
  double epsilon() const { return epsilon_; }
  int n_z_samples() const { return n_z_samples_; }
  double dz() const { return 1.0 / n_z_samples_; }
  double z_sample(int k) const { return static_cast<double>(k) / n_z_samples_; }

  const Polynomial& radius_poly() const { return radius_; }
  double radius(double z) const;
  double radius_slope(double z) const;
  Vec2 centerline(double z) const;
  Vec2 centerline_slope(double z) const;
  bool straight() const { return cx_.is_zero() && cy_.is_zero(); }

  // Section boundary at z, in unscaled (epsilon = 1) coordinates.
  // Tabulated: vertex-wise linear interpolation between slices.
  Polygon section(double z, int n_vertices_circular = 128) const;
  const std::vector<Polygon>& sections() const { return sections_; }

  // Point membership in the unscaled section, with a distance tolerance.
  bool section_contains(const Vec2& x, double z, double tol) const;
  double section_boundary_distance(const Vec2& x, double z) const;

 private:
  ChannelGeometry() = default;
  void check_z(double z) const;

  SectionKind kind_ = SectionKind::Circular;
  Polynomial radius_, cx_, cy_;
  std::vector<Polygon> sections_;
  double epsilon_ = 1.0;
  int n_z_samples_ = 2;
};

double area(const ChannelGeometry& geom, double z);
double area_slope(const ChannelGeometry& geom, double z,
                  DerivativeRule rule = DerivativeRule::SampleGrid);

// Per-slice diagnostics from the finite-element construction of the tilt field.
struct NeumannSliceReport {
  double z = 0.0;
  double compatibility_residual = 0.0;  // |A f - boundary flux|
  double divergence_mean = 0.0;
  double divergence_std = 0.0;          // spread of per-triangle divergence
  double tangency_residual = 0.0;       // max |V.n - w.n| over boundary vertices
};

struct NeumannOptions {
  int n_rings = 16;
  // Relative tolerance for |A f - flux| / max(|dA/dz|, A).
  double compatibility_tol = 0.05;
};

namespace detail {
struct TiltImpl;
}

class TiltField {
 public:
  enum class Provenance { ClosedForm, NeumannSolved };

  // Value at (x, z) on the domain of scale(): x is a physical horizontal point.
  Vec2 operator()(const Vec2& x, double z) const;
  // Horizontal divergence; constant in x by construction.
  double divergence(double z) const;
  double scale() const { return scale_; }
  Provenance provenance() const;
  const std::vector<NeumannSliceReport>* neumann_report() const;

  TiltField scaled(double factor) const;

 private:
  friend TiltField tilt_field_circular(const ChannelGeometry&);
  friend TiltField tilt_field_neumann(const ChannelGeometry&, const NeumannOptions&);
  TiltField(std::shared_ptr<const detail::TiltImpl> impl, double scale) : impl_(std::move(impl)), scale_(scale) {}

  std::shared_ptr<const detail::TiltImpl> impl_;
  double scale_ = 1.0;
};

TiltField tilt_field_circular(const ChannelGeometry& geom);
TiltField tilt_field_neumann(const ChannelGeometry& geom, const NeumannOptions& options = {});
TiltField scale_to_epsilon(const TiltField& tilt, double epsilon);

double check_divergence_identity(const ChannelGeometry& geom, const TiltField& tilt,
                                 DerivativeRule rule = DerivativeRule::SampleGrid);

struct FlowOptions {
  // 0 selects the geometry's n_z_samples.
  int n_steps = 0;
  double escape_tol = 1e-3;
};

// Flow of dx/dz = V(x, z) from z = 0; x0 in physical coordinates of tilt.scale().
Vec2 flow_map(const ChannelGeometry& geom, const TiltField& tilt, const Vec2& x0, double z_end,
              const FlowOptions& options = {});

// Hausdorff distance between the transported boundary of the z = 0 section and the
// boundary at z, both sampled with n_samples points (unscaled tilt field).
double flow_reconstruction_error(const ChannelGeometry& geom, const TiltField& tilt, double z,
                                 int n_samples = 64, const FlowOptions& options = {});

}  // namespace nozzle
