#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstdint>
#include <vector>

#include "spinsense/dephasing.hpp"
#include "spinsense/liouville.hpp"
#include "spinsense/network.hpp"

namespace spinsense {

// Counts sub-zero fidelity errors clamped to 0. Values below -1e-9 are a
// bug, not float noise, and raise NumericalIntegrityError instead.
struct ClampStats {
  long clamped = 0;
};

double clamp_error(double e, ClampStats* stats = nullptr);

// Perturbed trajectory in the LTI picture: r(t) = e^{t(A + delta S)} r0.
// When [A, S] = 0 within tolerance the factored form e^{tA} e^{t delta S}
// is used; otherwise Pade scaling-and-squaring on the full generator.
Eigen::VectorXd propagate_lti(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s,
                              double delta, double t, const Eigen::VectorXd& r0,
                              bool force_fast = false);

// Exact eigenprojector solution on the density-matrix side:
//   rho(t) = sum_kl e^{-t(i w_kl + delta gamma_kl)} Pi_k rho0 Pi_l.
// Independent of the LTI path; the two are cross-validated in tests.
Eigen::MatrixXcd propagate_eigen(const HamiltonianSS& h, const DephasingOp& op,
                                 double delta, double t, const Eigen::MatrixXcd& rho0);

// Fast exact error evaluation for one transfer problem. Exploits that A and
// every S_mu are simultaneously block-diagonalized by the H_ss eigenstructure:
//   fidelity(T, delta) = sum_k p_k^2
//                      + 2 sum_{k<l} p_k p_l cos(T(l_k - l_l)) e^{-T delta g_kl}
// with p_k = <OUT|Pi_k|IN>. One eigensolve of H serves every (op, delta).
class ErrorEvaluator {
 public:
  ErrorEvaluator(const HamiltonianSS& h, int input_spin, int output_spin);

  // Movable despite the atomic clamp counter; the count travels along.
  ErrorEvaluator(ErrorEvaluator&& other) noexcept
      : group_values_(std::move(other.group_values_)),
        p_(std::move(other.p_)),
        clamped_(other.clamped_.load()) {}

  double nominal_error(double t) const;
  double perturbed_error(double t, const DephasingOp& op, double delta) const;

  // d/d delta of the perturbed error at delta = 0 (exact, via the same
  // block structure). Used as the commuting fast path for sensitivities.
  double error_derivative_at_zero(double t, const DephasingOp& op) const;

  ClampStats clamp_stats() const { return {clamped_.load()}; }
  int num_groups() const { return static_cast<int>(group_values_.size()); }

 private:
  double clamp(double e) const {
    ClampStats s;
    double v = clamp_error(e, &s);
    if (s.clamped) clamped_ += s.clamped;
    return v;
  }

  Eigen::VectorXd group_values_;  // eigenvalue per eigenspace
  Eigen::VectorXd p_;             // <OUT|Pi_k|IN> per eigenspace
  mutable std::atomic<long> clamped_{0};
};

// e(T) = 1 - c e^{TA} r0, evaluated on the LTI side. Also caches the result
// on the controller when requested via the pipeline.
double fidelity_error(const Controller& ctrl, const LiouvilleSystem& sys);

// Scalar 1 - c e^{T(A + delta S)} r0 on the LTI side.
double perturbed_error_lti(const Controller& ctrl, const LiouvilleSystem& sys,
                           const Eigen::MatrixXd& s, double delta);

// (steps+1) x n_ops array of perturbed errors; row n holds delta(n).
struct ErrorGrid {
  int controller_id = 0;
  StrengthGrid grid;
  Eigen::MatrixXd values;  // grid.size() x ops

  int num_ops() const { return static_cast<int>(values.cols()); }
};

ErrorGrid compute_error_grid(const ErrorEvaluator& eval, double t,
                             const DephasingSet& set, const StrengthGrid& grid,
                             int controller_id, int jobs = 1);

}  // namespace spinsense
