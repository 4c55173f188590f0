#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinsense/dynamics.hpp"
#include "spinsense/liouville.hpp"

namespace spinsense {

// Natural cubic smoothing spline (Reinsch algorithm) with the penalty
// selected by generalized cross-validation. Banded solves keep the fit
// O(n) per penalty candidate.
class SmoothingSpline {
 public:
  static SmoothingSpline fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y);
  static SmoothingSpline fit_with_penalty(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y, double lambda);

  double value(double x) const;
  double derivative(double x) const;
  double penalty() const { return lambda_; }
  double gcv_score() const { return gcv_; }

 private:
  Eigen::VectorXd x_, f_, m_;  // knots, fitted values, second derivatives
  double lambda_ = 0.0;
  double gcv_ = 0.0;
};

// Gaussian kernel density estimate with Silverman bandwidth; degenerates to
// a point-mass descriptor when all samples coincide (the delta = 0 row).
struct KdeResult {
  bool point_mass = false;
  double location = 0.0;  // set when point_mass
  double bandwidth = 0.0;
  std::vector<double> samples;

  double density(double e) const;
  double mean() const;
};

struct SensitivityRecord {
  int controller_id = 0;
  double e_T = 0.0;
  double s_a = 0.0;     // mean analytic log-sensitivity over the set
  double s_k = 0.0;     // smoothed-mean-error estimate
  double zeta_a = 0.0;  // = s_a * e(T)
  double zeta_k = 0.0;  // spline derivative of the mean error at 0
  Eigen::VectorXd per_op_s;
  bool degenerate = false;        // e(T) below threshold, log-sens excluded
  bool fd_crosscheck_ok = true;   // spline derivative vs one-sided stencil
};

// s(S_mu, T) = (-1/e(T)) c e^{TA} (T S_mu) r0. Requires e(T) > 0 and
// [A, S_mu] = 0 within tolerance.
double analytic_log_sensitivity(const LiouvilleSystem& sys, double t,
                                const Eigen::MatrixXd& s_mu, double e_t);

// zeta(S_mu, T) = -c e^{TA} (T S_mu) r0; no division, always defined.
double differential_sensitivity(const LiouvilleSystem& sys, double t,
                                const Eigen::MatrixXd& s_mu);

KdeResult kde_error_density(const ErrorGrid& grid, int delta_index);

// Cubic smoothing spline through the per-delta mean errors.
SmoothingSpline smooth_mean_error(const ErrorGrid& grid);

// Per-delta means of the grid rows (compensated summation).
Eigen::VectorXd grid_row_means(const ErrorGrid& grid);

// s_k(S, T) = (1/e(T)) d/d delta of the smoothed mean error at 0.
struct KdeSensitivity {
  double s_k = 0.0;
  double zeta_k = 0.0;
  bool fd_crosscheck_ok = true;
};
KdeSensitivity kde_log_sensitivity(const ErrorGrid& grid, double e_t);

// Full per-controller record: analytic per-op sensitivities via the
// commuting fast path plus the smoothed numerical estimates.
SensitivityRecord compute_sensitivity_record(const ErrorEvaluator& eval, double t,
                                             const DephasingSet& set,
                                             const ErrorGrid& grid,
                                             int controller_id);

}  // namespace spinsense
