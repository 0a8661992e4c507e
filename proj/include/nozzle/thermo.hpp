#pragma once

#include <span>
#include <vector>

namespace nozzle {

struct Knot {
  double rho;
  double factor;
};

// p(rho) = kappa rho^gamma phi(rho), phi a positive monotone cubic (Fritsch-Carlson)
// through the knots, constant outside them. Without knots phi = 1.
class PressureLaw {
 public:
  static PressureLaw power(double gamma, double kappa);
  // validate = false skips the monotonicity checks; used to exercise diagnostics.
  static PressureLaw with_factor(double gamma, double kappa, std::vector<Knot> knots, bool validate = true);

  double gamma() const { return gamma_; }
  double kappa() const { return kappa_; }
  bool is_pure_power() const { return knots_.empty(); }
  const std::vector<Knot>& knots() const { return knots_; }
  // Limit of p'(rho)/rho^(gamma-1).
  double p_infinity() const;

  struct Value {
    double p;
    double dp;
  };
  Value eval(double rho) const;
  double pressure(double rho) const { return eval(rho).p; }
  double sound_speed(double rho) const;

  // H(rho) = rho * int_1^rho p(s)/s^2 ds, extended continuously to rho = 0.
  double potential(double rho) const;
  double potential_derivative(double rho) const;
  // Adaptive Gauss-Kronrod evaluation of the defining integral, for any law.
  double potential_by_quadrature(double rho) const;

 private:
  PressureLaw() = default;
  double factor(double rho, double* dfactor) const;
  double factor_integral(double a, double b) const;

  double gamma_ = 2.0;
  double kappa_ = 1.0;
  std::vector<Knot> knots_;
  std::vector<double> slopes_;
};

// 1/2 rho |u - U|^2 + H(rho) - H'(r)(rho - r) - H(r)
double relative_energy_density(const PressureLaw& law, double rho, std::span<const double> u, double r,
                               std::span<const double> U);

struct Interval {
  double lo;
  double hi;
};

struct CoercivityConstants {
  double c1;  // lower pinch on K x K
  double c2;  // upper pinch on K x K
  double c3;  // growth bound for rho outside K~
};

CoercivityConstants coercivity_check(const PressureLaw& law, Interval k, Interval k_tilde);

// Smooth cutoff: 1 on [lower/2, 2 upper], 0 below lower/4 and above 4 upper.
class EssResCutoff {
 public:
  EssResCutoff(double rho_lower, double rho_upper);
  double chi(double rho) const;
  double rho_lower() const { return lower_; }
  double rho_upper() const { return upper_; }

 private:
  double lower_;
  double upper_;
};

struct EssResSplit {
  std::vector<double> ess;
  std::vector<double> res;
};

EssResSplit ess_res_split(const EssResCutoff& cut, std::span<const double> h, std::span<const double> rho);

}  // namespace nozzle
