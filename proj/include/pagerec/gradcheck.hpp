#pragma once
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "pagerec/error.hpp"

namespace pagerec {

// Central-difference check of an analytic gradient, double precision only.
// Returns max over coordinates of
//   |analytic - diff| / max(|analytic|, |diff|, 1e-12).
inline double grad_check(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> point, const std::vector<double>& analytic,
    double delta = 1e-5) {
  if (point.size() != analytic.size())
    throw DimensionError("grad_check: point and gradient sizes differ");
  double worst = 0.0;
  for (size_t i = 0; i < point.size(); ++i) {
    const double x0 = point[i];
    point[i] = x0 + delta;
    const double fp = f(point);
    point[i] = x0 - delta;
    const double fm = f(point);
    point[i] = x0;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("grad_check: function returned a non-finite value");
    const double diff = (fp - fm) / (2.0 * delta);
    const double denom =
        std::max({std::fabs(analytic[i]), std::fabs(diff), 1e-12});
    worst = std::max(worst, std::fabs(analytic[i] - diff) / denom);
  }
  return worst;
}

}  // namespace pagerec
