#include "nozzle/thermo.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "nozzle/errors.hpp"

namespace nozzle {

PressureLaw PressureLaw::power(double gamma, double kappa) { return with_factor(gamma, kappa, {}); }

PressureLaw PressureLaw::with_factor(double gamma, double kappa, std::vector<Knot> knots, bool validate) {
  if (!(gamma > 1.5)) fail(ErrorKind::Domain, "the growth hypothesis requires gamma > 3/2");
  if (!(kappa > 0.0)) fail(ErrorKind::Domain, "kappa must be positive");
  PressureLaw law;
  law.gamma_ = gamma;
  law.kappa_ = kappa;
  std::sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.rho < b.rho; });
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!(knots[i].rho > 0.0) || !(knots[i].factor > 0.0))
      fail(ErrorKind::Domain, "spline knots need positive density and factor");
    if (i > 0 && !(knots[i].rho > knots[i - 1].rho)) fail(ErrorKind::Domain, "duplicate spline knot");
    if (validate && i > 0 && knots[i].factor < knots[i - 1].factor)
      fail(ErrorKind::Domain, "pressure factor must be non-decreasing");
  }
  if (knots.size() == 1) knots.clear();  // a single knot is a constant factor
  law.knots_ = std::move(knots);

  // Fritsch-Carlson slopes: harmonic mean of secants, zero at extrema and ends.
  const std::size_t n = law.knots_.size();
  law.slopes_.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d0 = (law.knots_[i].factor - law.knots_[i - 1].factor) / (law.knots_[i].rho - law.knots_[i - 1].rho);
    const double d1 = (law.knots_[i + 1].factor - law.knots_[i].factor) / (law.knots_[i + 1].rho - law.knots_[i].rho);
    if (d0 * d1 > 0.0) {
      const double h0 = law.knots_[i].rho - law.knots_[i - 1].rho;
      const double h1 = law.knots_[i + 1].rho - law.knots_[i].rho;
      const double w0 = 2.0 * h1 + h0, w1 = h1 + 2.0 * h0;
      law.slopes_[i] = (w0 + w1) / (w0 / d0 + w1 / d1);
    }
  }
  if (validate && n > 0) {
    const double top = 10.0 * law.knots_.back().rho;
    for (int i = 1; i <= 4000; ++i) {
      const double rho = top * i / 4000.0;
      if (!(law.eval(rho).dp > 0.0)) {
        std::ostringstream os;
        os << "pressure is not strictly increasing near rho = " << rho;
        fail(ErrorKind::Domain, os.str());
      }
    }
  }
  return law;
}

double PressureLaw::factor(double rho, double* dfactor) const {
  if (dfactor) *dfactor = 0.0;
  if (knots_.empty()) return 1.0;
  if (rho <= knots_.front().rho) return knots_.front().factor;
  if (rho >= knots_.back().rho) return knots_.back().factor;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), rho, [](double r, const Knot& k) { return r < k.rho; });
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double h = knots_[i + 1].rho - knots_[i].rho;
  const double t = (rho - knots_[i].rho) / h;
  const double y0 = knots_[i].factor, y1 = knots_[i + 1].factor;
  const double m0 = slopes_[i] * h, m1 = slopes_[i + 1] * h;
  const double t2 = t * t, t3 = t2 * t;
  if (dfactor) {
    *dfactor = ((6 * t2 - 6 * t) * y0 + (3 * t2 - 4 * t + 1) * m0 + (-6 * t2 + 6 * t) * y1 + (3 * t2 - 2 * t) * m1) / h;
  }
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * m1;
}

double PressureLaw::p_infinity() const {
  return kappa_ * gamma_ * (knots_.empty() ? 1.0 : knots_.back().factor);
}

PressureLaw::Value PressureLaw::eval(double rho) const {
  if (!(rho >= 0.0)) fail(ErrorKind::Domain, "density must be non-negative");
  if (rho == 0.0) return {0.0, 0.0};
  double dphi = 0.0;
  const double phi = factor(rho, &dphi);
  const double rg = std::pow(rho, gamma_);
  return {kappa_ * rg * phi, kappa_ * (gamma_ * rg / rho * phi + rg * dphi)};
}

double PressureLaw::sound_speed(double rho) const { return std::sqrt(eval(rho).dp); }

namespace {

template <class F>
double integrate(F f, double a, double b) {
  if (a == b) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  double err = 0.0;
  return gauss_kronrod<double, 61>::integrate(f, a, b, 8, 1e-13, &err);
}

// int_a^b f over [a,b] split at the given breakpoints.
template <class F>
double integrate_split(F f, double a, double b, const std::vector<double>& breaks) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  std::vector<double> pts{lo};
  for (double x : breaks)
    if (x > lo && x < hi) pts.push_back(x);
  pts.push_back(hi);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) s += integrate(f, pts[i], pts[i + 1]);
  return a <= b ? s : -s;
}

}  // namespace

// int_a^b kappa s^(gamma-2) (phi(s) - phi_lo) ds; the integrand vanishes below the first knot.
double PressureLaw::factor_integral(double a, double b) const {
  if (knots_.empty()) return 0.0;
  const double lo = knots_.front().factor;
  std::vector<double> breaks;
  for (const auto& k : knots_) breaks.push_back(k.rho);
  auto f = [this, lo](double s) { return kappa_ * std::pow(s, gamma_ - 2.0) * (factor(s, nullptr) - lo); };
  return integrate_split(f, std::max(a, 0.0), std::max(b, 0.0), breaks);
}

double PressureLaw::potential(double rho) const {
  if (!(rho >= 0.0)) fail(ErrorKind::Domain, "density must be non-negative");
  const double lo = knots_.empty() ? 1.0 : knots_.front().factor;
  // Closed form of the constant-factor part.
  const double base = lo * kappa_ * (std::pow(rho, gamma_) - rho) / (gamma_ - 1.0);
  if (knots_.empty() || rho == 0.0) return base;
  return base + rho * factor_integral(1.0, rho);
}

double PressureLaw::potential_derivative(double rho) const {
  if (!(rho >= 0.0)) fail(ErrorKind::Domain, "density must be non-negative");
  const double lo = knots_.empty() ? 1.0 : knots_.front().factor;
  const double base = lo * kappa_ * (gamma_ * std::pow(rho, gamma_ - 1.0) - 1.0) / (gamma_ - 1.0);
  if (knots_.empty()) return base;
  // d/drho [rho I(rho)] = I(rho) + rho * integrand(rho)
  const double extra = rho > 0.0 ? kappa_ * std::pow(rho, gamma_ - 1.0) * (factor(rho, nullptr) - lo) : 0.0;
  return base + factor_integral(1.0, rho) + extra;
}

double PressureLaw::potential_by_quadrature(double rho) const {
  if (!(rho >= 0.0)) fail(ErrorKind::Domain, "density must be non-negative");
  if (rho == 0.0) return 0.0;
  std::vector<double> breaks;
  for (const auto& k : knots_) breaks.push_back(k.rho);
  auto f = [this](double s) { return eval(s).p / (s * s); };
  return rho * integrate_split(f, 1.0, rho, breaks);
}

double relative_energy_density(const PressureLaw& law, double rho, std::span<const double> u, double r,
                               std::span<const double> U) {
  if (!(r > 0.0)) fail(ErrorKind::Domain, "reference density must be positive");
  if (!(rho >= 0.0)) fail(ErrorKind::Domain, "density must be non-negative");
  double w2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) w2 += (u[i] - U[i]) * (u[i] - U[i]);
  return 0.5 * rho * w2 + law.potential(rho) - law.potential_derivative(r) * (rho - r) - law.potential(r);
}

CoercivityConstants coercivity_check(const PressureLaw& law, Interval k, Interval kt) {
  if (!(k.lo > kt.lo && k.hi < kt.hi && kt.lo > 0.0 && k.lo <= k.hi))
    fail(ErrorKind::Domain, "coercivity check needs K inside the interior of K~ inside (0, inf)");
  constexpr int n = 41;
  const double speeds[] = {0.0, 0.25, 1.0, 3.0};
  CoercivityConstants c{std::numeric_limits<double>::infinity(), 0.0, std::numeric_limits<double>::infinity()};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double rho = k.lo + (k.hi - k.lo) * i / (n - 1);
      const double r = k.lo + (k.hi - k.lo) * j / (n - 1);
      for (double w : speeds) {
        const double norm = w * w + (rho - r) * (rho - r);
        if (norm == 0.0) continue;
        const double u[1] = {w}, U[1] = {0.0};
        const double e = relative_energy_density(law, rho, u, r, U);
        c.c1 = std::min(c.c1, e / norm);
        c.c2 = std::max(c.c2, e / norm);
      }
    }
  }
  if (!(c.c1 > 0.0)) fail(ErrorKind::CoercivityViolation, "relative energy is not bounded below on K");
  std::vector<double> outside;
  for (int i = 0; i < n; ++i) outside.push_back(kt.lo * i / n);
  for (int i = 1; i <= 4 * n; ++i) outside.push_back(kt.hi * std::pow(100.0, static_cast<double>(i) / (4 * n)));
  for (int j = 0; j < n; ++j) {
    const double r = k.lo + (k.hi - k.lo) * j / (n - 1);
    for (double rho : outside) {
      for (double w : speeds) {
        const double u[1] = {w}, U[1] = {0.0};
        const double e = relative_energy_density(law, rho, u, r, U);
        c.c3 = std::min(c.c3, e / (1.0 + rho * w * w + std::pow(rho, law.gamma())));
      }
    }
  }
  if (!(c.c3 > 0.0)) fail(ErrorKind::CoercivityViolation, "relative energy does not control the far field");
  return c;
}

namespace {

double smooth_step(double t) {
  auto f = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return f(t) / (f(t) + f(1.0 - t));
}

}  // namespace

EssResCutoff::EssResCutoff(double rho_lower, double rho_upper) : lower_(rho_lower), upper_(rho_upper) {
  if (!(rho_lower > 0.0) || !(rho_upper >= rho_lower)) fail(ErrorKind::Domain, "cutoff needs 0 < lower <= upper");
}

double EssResCutoff::chi(double rho) const {
  if (rho <= 0.25 * lower_ || rho >= 4.0 * upper_) return 0.0;
  if (rho < 0.5 * lower_) return smooth_step((rho - 0.25 * lower_) / (0.25 * lower_));
  if (rho > 2.0 * upper_) return 1.0 - smooth_step((rho - 2.0 * upper_) / (2.0 * upper_));
  return 1.0;
}

EssResSplit ess_res_split(const EssResCutoff& cut, std::span<const double> h, std::span<const double> rho) {
  if (h.size() != rho.size()) fail(ErrorKind::Domain, "fields must share a grid");
  EssResSplit out;
  out.ess.resize(h.size());
  out.res.resize(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    out.ess[i] = cut.chi(rho[i]) * h[i];
    out.res[i] = h[i] - out.ess[i];
  }
  return out;
}

}  // namespace nozzle
