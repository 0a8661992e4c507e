#include "nozzle/rate_fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nozzle/errors.hpp"

namespace nozzle {

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::DegenerateInput, "power-law fit needs two or more points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(ErrorKind::DegenerateInput, "power-law fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) fail(ErrorKind::DegenerateInput, "power-law fit needs distinct abscissae");
  PowerFit f;
  f.q = sxy / sxx;
  f.C = std::exp(my - f.q * mx);
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

bool monotone_in(const std::vector<double>& x, const std::vector<double>& y, double slack) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] > x[b]; });
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (y[idx[i]] > y[idx[i - 1]] + slack) return false;
  return true;
}

}  // namespace nozzle
