#include "spinsense/rim.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spinsense/common.hpp"
#include "spinsense/stats.hpp"

namespace spinsense {

namespace {

int nearest_index(const StrengthGrid& grid, double delta) {
  double step = grid.max_delta / grid.steps;
  int n = static_cast<int>(std::lround(delta / step));
  if (n < 0 || n > grid.steps) throw std::invalid_argument("delta outside strength grid");
  return n;
}

}  // namespace

double RimCurve::at_delta(double delta) const { return values(nearest_index(grid, delta)); }

double RimCurve::adjusted_at_delta(double delta) const {
  return adjusted(nearest_index(grid, delta));
}

RimCurve rim1_curve(const ErrorGrid& grid) {
  RimCurve curve;
  curve.controller_id = grid.controller_id;
  curve.grid = grid.grid;
  curve.values = grid_row_means(grid);
  // Row 0 is constant across operators; pin its mean to the nominal error
  // bit-for-bit rather than trusting the accumulator.
  curve.values(0) = grid.values(0, 0);
  curve.adjusted = curve.values.array() - curve.values(0);
  return curve;
}

Theorem1Result theorem1_check(const SensitivityRecord& sens, const RimCurve& curve) {
  Theorem1Result res;
  res.zeta_a = sens.zeta_a;
  double delta1 = curve.grid.delta(1);
  res.forward_difference = curve.adjusted(1) / delta1;
  double diff = std::abs(res.zeta_a - res.forward_difference);
  if (res.zeta_a == 0.0) {
    res.absolute_fallback = true;
    res.relative_error = diff;
  } else {
    res.relative_error = diff / std::abs(res.zeta_a);
  }
  return res;
}

TauHeatMap rim_delta_selection(const std::vector<RimCurve>& curves, int points,
                               double delta_lo, double delta_hi) {
  if (curves.size() < 2)
    throw std::invalid_argument("need at least two controllers for rank correlation");
  TauHeatMap map;
  map.deltas.resize(points);
  for (int i = 0; i < points; ++i) {
    double t = static_cast<double>(i) / (points - 1);
    map.deltas(i) = delta_lo * std::pow(delta_hi / delta_lo, t);
  }

  const std::size_t n = curves.size();
  std::vector<std::vector<double>> rankings(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    rankings[static_cast<std::size_t>(i)].reserve(n);
    for (const auto& c : curves)
      rankings[static_cast<std::size_t>(i)].push_back(c.at_delta(map.deltas(i)));
  }

  map.tau.resize(points, points);
  for (int i = 0; i < points; ++i) {
    map.tau(i, i) = 1.0;
    for (int j = i + 1; j < points; ++j) {
      double tau = kendall_tau(rankings[static_cast<std::size_t>(i)],
                               rankings[static_cast<std::size_t>(j)]);
      map.tau(i, j) = tau;
      map.tau(j, i) = tau;
    }
  }
  return map;
}

}  // namespace spinsense
