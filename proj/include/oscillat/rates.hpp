#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "oscillat/error.hpp"

namespace oscillat {

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

/// Least squares line through (log eps, log err).
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw Error(ErrorKind::InsufficientPoints, "rate fit needs at least 2 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].first > 0.0)) throw Error(ErrorKind::InvalidConfig, "eps must be positive");
    if (points[i].second == 0.0) throw Error(ErrorKind::ZeroError, "error is exactly zero");
    if (!(points[i].second > 0.0)) throw Error(ErrorKind::InvalidConfig, "error must be positive");
    for (std::size_t j = 0; j < i; ++j)
      if (points[j].first == points[i].first) throw Error(ErrorKind::InvalidConfig, "eps values must be distinct");
  }
  const double n = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& [e, r] : points) {
    sx += std::log(e);
    sy += std::log(r);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [e, r] : points) {
    const double dx = std::log(e) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(r) - my);
  }
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& [e, r] : points)
    fit.max_residual = std::max(fit.max_residual, std::abs(std::log(r) - (fit.intercept + fit.slope * std::log(e))));
  return fit;
}

}  // namespace oscillat
