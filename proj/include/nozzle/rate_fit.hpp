#pragma once

#include <vector>

namespace nozzle {

// y ~ C x^q by least squares on (log x, log y).
struct PowerFit {
  double q = 0.0;
  double C = 0.0;
  double r2 = 0.0;
};

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// True when y does not increase as x decreases, up to an absolute slack.
bool monotone_in(const std::vector<double>& x, const std::vector<double>& y, double slack = 0.0);

}  // namespace nozzle
