#include "spinsense/dephasing.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spinsense {

DephasingOp make_dephasing_op(const HamiltonianSS& h, const HermitianBasis& basis,
                              const Eigen::VectorXd& c_raw) {
  const int k = h.num_groups();
  if (c_raw.size() != k)
    throw std::invalid_argument("need one dephasing eigenvalue per eigenspace group");

  // Normalize so the peak rate max_{k != l} (c_k - c_l)^2 / 2 equals 1.
  double max_gamma = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      double g = 0.5 * (c_raw(i) - c_raw(j)) * (c_raw(i) - c_raw(j));
      max_gamma = std::max(max_gamma, g);
    }
  if (max_gamma < 1e-24)
    throw std::invalid_argument("degenerate dephasing draw: all eigenvalues equal");

  DephasingOp op;
  op.c = c_raw / std::sqrt(max_gamma);
  // Gauge: the dissipator is invariant under V -> V + aI, so center the
  // eigenvalues. A large common offset (nearly equal raw draws blow up under
  // the rate normalization) would otherwise cancel only approximately in S.
  op.c.array() -= op.c.mean();

  op.V = Eigen::MatrixXd::Zero(h.dim(), h.dim());
  for (int g = 0; g < k; ++g) op.V += op.c(g) * h.projector(g);

  op.rates = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      op.rates(i, j) = 0.5 * (op.c(i) - op.c(j)) * (op.c(i) - op.c(j));

  op.S = dephasing_superop(op.V.cast<std::complex<double>>(), basis);
  return op;
}

DephasingOp sample_dephasing_op(const HamiltonianSS& h, const HermitianBasis& basis, Rng& rng) {
  const int k = h.num_groups();
  if (k < 2)
    throw std::invalid_argument("Hamiltonian proportional to identity cannot dephase");
  for (;;) {
    Eigen::VectorXd c(k);
    for (int i = 0; i < k; ++i) c(i) = rng.normal();
    double spread = (c.maxCoeff() - c.minCoeff());
    if (spread * spread < 1e-24) continue;  // resample a degenerate draw
    return make_dephasing_op(h, basis, c);
  }
}

CpReport validate_cp(const DephasingOp& op, const Eigen::MatrixXd& a_superop) {
  CpReport report;
  auto fail = [&report](const std::string& msg) {
    report.pass = false;
    report.violations.push_back(msg);
  };

  const int k = static_cast<int>(op.rates.rows());
  for (int i = 0; i < k; ++i) {
    if (op.rates(i, i) != 0.0) fail("nonzero diagonal rate");
    for (int j = 0; j < k; ++j) {
      if (op.rates(i, j) < 0.0) fail("negative rate");
      if (std::abs(op.rates(i, j) - op.rates(j, i)) > 1e-12) fail("asymmetric rates");
    }
  }

  if ((op.S - op.S.transpose()).cwiseAbs().maxCoeff() > 1e-10) fail("S not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.S, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().maxCoeff() > 1e-12) fail("S not negative semidefinite");

  // Trace preservation: the identity component (first basis element) spans
  // the kernel direction vec(I)/sqrt(N), i.e. the first column of S is zero.
  if (op.S.col(0).cwiseAbs().maxCoeff() > 1e-10) fail("S does not preserve trace");

  double comm = (a_superop * op.S - op.S * a_superop).cwiseAbs().maxCoeff();
  if (comm > 1e-10) {
    std::ostringstream msg;
    msg << "[A, S] commutator violation: " << comm;
    fail(msg.str());
  }
  return report;
}

DephasingSet generate_set(const HamiltonianSS& h, const HermitianBasis& basis,
                          int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("dephasing set count must be >= 1");
  DephasingSet set;
  set.seed = seed;
  set.hamiltonian_hash = hamiltonian_hash(h.matrix);
  set.dim = h.dim();
  set.ops.reserve(static_cast<std::size_t>(count));

  const Eigen::MatrixXd a = hamiltonian_superop(h.matrix, basis);
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    DephasingOp op = sample_dephasing_op(h, basis, rng);
    CpReport report = validate_cp(op, a);
    if (!report.pass) {
      std::ostringstream msg;
      msg << "generated dephasing operator " << i << " failed validation:";
      for (const auto& v : report.violations) msg << " " << v << ";";
      throw NumericalIntegrityError(msg.str());
    }
    set.ops.push_back(std::move(op));
  }
  return set;
}

}  // namespace spinsense
