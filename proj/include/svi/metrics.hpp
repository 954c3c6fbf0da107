#ifndef SVI_METRICS_HPP
#define SVI_METRICS_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "svi/bregman.hpp"
#include "svi/error.hpp"
#include "svi/sets.hpp"
#include "svi/vec.hpp"

namespace svi {

/// R_a(x, H) = ||x - P_X(x, a H)||; zero exactly at solutions.
inline double natural_residual(cspan x, cspan H, double a, const distance_generator& gen,
                               const feasible_set& set, double prox_tol = 1e-10) {
  require(a > 0, errc::invalid_parameter, "residual scale a must be positive");
  vec r = scaled(H, a);
  vec p = prox_map(gen, set, x, r, prox_tol);
  return dist2(x, p);
}

/// g(x) = F(x)'x - min_{z in X} F(x)'z; requires a bounded set.
inline double gap_function(cspan x, cspan Fx, const feasible_set& set) {
  require(set.bounded(), errc::unbounded, "gap function needs a bounded set");
  auto [z, v] = set.linear_minimize(Fx);
  (void)z;
  return dot(Fx, x) - v;
}

struct rate_fit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares fit of log(value) against log(k+1). The k range must span
/// at least `min_span_ratio` (default two decades) or the fit is rejected
/// as degenerate.
inline rate_fit fit_rate(const std::vector<std::pair<long long, double>>& points,
                         double min_span_ratio = 100.0) {
  require(points.size() >= 10, errc::invalid_parameter, "fit_rate needs at least 10 points");
  long long kmin = points.front().first, kmax = points.front().first;
  for (const auto& [k, v] : points) {
    require(v > 0, errc::invalid_parameter, "fit_rate needs positive values");
    kmin = std::min(kmin, k);
    kmax = std::max(kmax, k);
  }
  require(static_cast<double>(kmax + 1) / static_cast<double>(kmin + 1) >= min_span_ratio,
          errc::degenerate_fit, "fit window spans too little of k");

  const double n = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [k, v] : points) {
    const double x = std::log(static_cast<double>(k + 1));
    const double y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double vxx = sxx - sx * sx / n;
  const double vxy = sxy - sx * sy / n;
  const double vyy = syy - sy * sy / n;
  require(vxx > 0, errc::degenerate_fit, "fit abscissae are degenerate");

  rate_fit f;
  f.slope = vxy / vxx;
  f.intercept = (sy - f.slope * sx) / n;
  f.r2 = vyy > 0 ? (vxy * vxy) / (vxx * vyy) : 1.0;
  return f;
}

/// Running minimum transform used before rate fits.
inline std::vector<std::pair<long long, double>> running_min(
    const std::vector<std::pair<long long, double>>& points) {
  std::vector<std::pair<long long, double>> out;
  out.reserve(points.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [k, v] : points) {
    best = std::min(best, v);
    out.emplace_back(k, best);
  }
  return out;
}

}  // namespace svi

#endif  // SVI_METRICS_HPP
