#pragma once
// Independent reference computations used only by the tests.

#include <cmath>
#include <utility>
#include <vector>

namespace oracle {

// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Shoelace area of a polygon given as coordinate arrays.
inline double shoelace(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t j = (i + 1) % x.size();
    s += x[i] * y[j] - x[j] * y[i];
  }
  return 0.5 * s;
}

// Classical RK4 on a scalar ODE with many steps.
template <class F>
double rk4_scalar(F f, double y0, double t0, double t1, int steps) {
  double y = y0, h = (t1 - t0) / steps;
  for (int i = 0; i < steps; ++i) {
    const double t = t0 + i * h;
    const double k1 = f(t, y), k2 = f(t + h / 2, y + h / 2 * k1), k3 = f(t + h / 2, y + h / 2 * k2),
                 k4 = f(t + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return y;
}

}  // namespace oracle

namespace oracle {

// Exact Riemann solution of 1D isentropic Euler with p = kappa rho^gamma.
struct IsentropicRiemann {
  double gamma, kappa, rl, ul, rr, ur;
  double rs = 0, us = 0;

  double c(double r) const { return std::sqrt(kappa * gamma * std::pow(r, gamma - 1)); }
  double p(double r) const { return kappa * std::pow(r, gamma); }
  // Velocity jump across a wave from state rk to density r.
  double f(double r, double rk) const {
    if (r > rk) return std::sqrt((p(r) - p(rk)) * (r - rk) / (r * rk));
    return 2.0 / (gamma - 1.0) * (c(r) - c(rk));
  }
  void solve() {
    double lo = 1e-12, hi = 100.0 * (rl + rr);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double g = ul - f(mid, rl) - (ur + f(mid, rr));
      (g > 0 ? lo : hi) = mid;
    }
    rs = 0.5 * (lo + hi);
    us = ul - f(rs, rl);
  }
  // (rho, u) at similarity coordinate xi = x / t.
  std::pair<double, double> sample(double xi) const {
    if (xi < us) {
      if (rs > rl) {
        const double s = (rs * us - rl * ul) / (rs - rl);
        return xi < s ? std::make_pair(rl, ul) : std::make_pair(rs, us);
      }
      if (xi < ul - c(rl)) return {rl, ul};
      if (xi > us - c(rs)) return {rs, us};
      const double j = ul + 2.0 * c(rl) / (gamma - 1.0);
      const double cc = (gamma - 1.0) / (gamma + 1.0) * (j - xi);
      return {std::pow(cc * cc / (kappa * gamma), 1.0 / (gamma - 1.0)), xi + cc};
    }
    if (rs > rr) {
      const double s = (rs * us - rr * ur) / (rs - rr);
      return xi > s ? std::make_pair(rr, ur) : std::make_pair(rs, us);
    }
    if (xi > ur + c(rr)) return {rr, ur};
    if (xi < us + c(rs)) return {rs, us};
    const double k = ur - 2.0 * c(rr) / (gamma - 1.0);
    const double cc = (gamma - 1.0) / (gamma + 1.0) * (xi - k);
    return {std::pow(cc * cc / (kappa * gamma), 1.0 / (gamma - 1.0)), xi - cc};
  }
};

}  // namespace oracle

namespace oracle {

// Composite Simpson rule with n (even) panels.
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

}  // namespace oracle
