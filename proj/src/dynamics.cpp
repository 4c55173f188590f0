#include "spinsense/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinsense/common.hpp"

namespace spinsense {

double clamp_error(double e, ClampStats* stats) {
  const double slack = 1e-9;
  if (e >= 0.0 && e <= 1.0) return e;
  if (e < -slack || e > 1.0 + slack) {
    std::ostringstream msg;
    msg << "fidelity error " << e << " outside [0,1] beyond slack";
    throw NumericalIntegrityError(msg.str());
  }
  if (stats) ++stats->clamped;
  return e < 0.0 ? 0.0 : 1.0;
}

namespace {

// e^{M} for symmetric M via eigendecomposition.
Eigen::MatrixXd expm_symmetric(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

bool commutes(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s) {
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff() * s.cwiseAbs().maxCoeff());
  return (a * s - s * a).cwiseAbs().maxCoeff() <= 1e-10 * scale;
}

}  // namespace

Eigen::VectorXd propagate_lti(const Eigen::MatrixXd& a, const Eigen::MatrixXd& s,
                              double delta, double t, const Eigen::VectorXd& r0,
                              bool force_fast) {
  if (delta < 0.0) throw std::invalid_argument("delta must be nonnegative");
  if (t < 0.0) throw std::invalid_argument("time must be nonnegative");

  if (commutes(a, s)) {
    Eigen::MatrixXd ua = (t * a).exp();  // Pade scaling-and-squaring
    return ua * (expm_symmetric(t * delta * s) * r0);
  }
  if (force_fast)
    throw std::invalid_argument("fast path forced but [A, S] != 0");
  return (t * (a + delta * s)).exp() * r0;
}

Eigen::MatrixXcd propagate_eigen(const HamiltonianSS& h, const DephasingOp& op,
                                 double delta, double t, const Eigen::MatrixXcd& rho0) {
  if (op.c.size() != h.num_groups())
    throw std::invalid_argument("dephasing operator does not match Hamiltonian eigenstructure");
  const Eigen::MatrixXd& w = h.eigenvectors;
  Eigen::MatrixXcd r = w.transpose() * rho0 * w;  // eigenbasis coordinates

  const int k = h.num_groups();
  for (int g = 0; g < k; ++g) {
    for (int l = 0; l < k; ++l) {
      std::complex<double> phase(-t * delta * op.rates(g, l),
                                 -t * (h.group_values(g) - h.group_values(l)));
      std::complex<double> factor = std::exp(phase);
      for (int i : h.groups[g])
        for (int j : h.groups[l]) r(i, j) *= factor;
    }
  }
  return w * r * w.transpose();
}

ErrorEvaluator::ErrorEvaluator(const HamiltonianSS& h, int input_spin, int output_spin) {
  const int n = h.dim();
  if (input_spin < 1 || input_spin > n || output_spin < 1 || output_spin > n)
    throw std::invalid_argument("spin index out of range");
  group_values_ = h.group_values;
  const int k = h.num_groups();
  p_.resize(k);
  for (int g = 0; g < k; ++g) {
    double sum = 0.0;
    for (int i : h.groups[g])
      sum += h.eigenvectors(input_spin - 1, i) * h.eigenvectors(output_spin - 1, i);
    p_(g) = sum;
  }
}

double ErrorEvaluator::nominal_error(double t) const {
  std::complex<double> amp(0.0, 0.0);
  for (int g = 0; g < p_.size(); ++g)
    amp += p_(g) * std::exp(std::complex<double>(0.0, -t * group_values_(g)));
  return clamp(1.0 - std::norm(amp));
}

double ErrorEvaluator::perturbed_error(double t, const DephasingOp& op, double delta) const {
  const int k = static_cast<int>(p_.size());
  if (op.c.size() != k)
    throw std::invalid_argument("dephasing operator does not match Hamiltonian eigenstructure");
  if (delta == 0.0) return nominal_error(t);  // bit-identical to the nominal value
  double fid = 0.0;
  for (int g = 0; g < k; ++g) fid += p_(g) * p_(g);
  for (int g = 0; g < k; ++g) {
    for (int l = g + 1; l < k; ++l) {
      fid += 2.0 * p_(g) * p_(l) * std::cos(t * (group_values_(g) - group_values_(l))) *
             std::exp(-t * delta * op.rates(g, l));
    }
  }
  return clamp(1.0 - fid);
}

double ErrorEvaluator::error_derivative_at_zero(double t, const DephasingOp& op) const {
  const int k = static_cast<int>(p_.size());
  double deriv = 0.0;
  for (int g = 0; g < k; ++g)
    for (int l = g + 1; l < k; ++l)
      deriv += 2.0 * p_(g) * p_(l) * std::cos(t * (group_values_(g) - group_values_(l))) *
               t * op.rates(g, l);
  return deriv;
}

double fidelity_error(const Controller& ctrl, const LiouvilleSystem& sys) {
  Eigen::MatrixXd u = (ctrl.readout_time * sys.A).exp();
  return clamp_error(1.0 - sys.c.dot(u * sys.r0));
}

double perturbed_error_lti(const Controller& ctrl, const LiouvilleSystem& sys,
                           const Eigen::MatrixXd& s, double delta) {
  Eigen::VectorXd r = propagate_lti(sys.A, s, delta, ctrl.readout_time, sys.r0);
  return clamp_error(1.0 - sys.c.dot(r));
}

ErrorGrid compute_error_grid(const ErrorEvaluator& eval, double t,
                             const DephasingSet& set, const StrengthGrid& grid,
                             int controller_id, int jobs) {
  ErrorGrid out;
  out.controller_id = controller_id;
  out.grid = grid;
  out.values.resize(grid.size(), static_cast<Eigen::Index>(set.ops.size()));

  const double nominal = eval.nominal_error(t);
  // One column per operator; its per-pair rates are the diagonalization of
  // S_mu in the shared eigenstructure, reused across every delta.
  parallel_for(set.ops.size(), jobs, [&](std::size_t mu) {
    const DephasingOp& op = set.ops[mu];
    auto col = out.values.col(static_cast<Eigen::Index>(mu));
    col(0) = nominal;  // row 0 is the unperturbed error for every operator
    for (int n = 1; n < grid.size(); ++n)
      col(n) = eval.perturbed_error(t, op, grid.delta(n));
  });
  return out;
}

}  // namespace spinsense
