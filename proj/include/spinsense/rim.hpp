#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinsense/dynamics.hpp"
#include "spinsense/sensitivity.hpp"

namespace spinsense {

// RIM1(delta) = mean over the dephasing set of the perturbed error, one
// value per grid point; adjusted variant subtracts the nominal error.
struct RimCurve {
  int controller_id = 0;
  StrengthGrid grid;
  Eigen::VectorXd values;
  Eigen::VectorXd adjusted;

  double at_delta(double delta) const;       // nearest grid point
  double adjusted_at_delta(double delta) const;
};

RimCurve rim1_curve(const ErrorGrid& grid);

// Forward-difference check that the mean differential sensitivity equals
// d(RIM1)/d delta at 0: |zeta_a - adjusted(delta_1)/delta_1| / |zeta_a|.
struct Theorem1Result {
  double relative_error = 0.0;
  bool absolute_fallback = false;  // zeta_a == 0; relative_error holds |diff|
  double zeta_a = 0.0;
  double forward_difference = 0.0;
};

Theorem1Result theorem1_check(const SensitivityRecord& sens, const RimCurve& curve);

// Kendall-tau agreement between controller rankings by RIM1(delta1) and
// RIM1(delta2) on a log-spaced delta subgrid.
struct TauHeatMap {
  Eigen::VectorXd deltas;
  Eigen::MatrixXd tau;
};

TauHeatMap rim_delta_selection(const std::vector<RimCurve>& curves, int points = 20,
                               double delta_lo = 0.005, double delta_hi = 0.1);

}  // namespace spinsense
