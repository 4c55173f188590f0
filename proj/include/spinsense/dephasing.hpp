#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spinsense/common.hpp"
#include "spinsense/liouville.hpp"
#include "spinsense/network.hpp"

namespace spinsense {

// One dephasing process in the Hamiltonian eigenbasis: V = sum_k c_k Pi_k
// with one coefficient per (degeneracy-grouped) eigenspace. Coefficients are
// normalized so the largest decoherence rate gamma_kl = (c_k - c_l)^2 / 2
// equals 1, making the scalar strength delta the peak dephasing rate.
struct DephasingOp {
  Eigen::VectorXd c;      // per eigenspace group
  Eigen::MatrixXd V;      // N x N real symmetric
  Eigen::MatrixXd S;      // N^2 x N^2 superoperator
  Eigen::MatrixXd rates;  // K x K, gamma_kl
};

struct CpReport {
  bool pass = true;
  std::vector<std::string> violations;
};

// delta(n) = step * n for n = 0..steps; default 1001 points over [0, 0.1].
struct StrengthGrid {
  int steps = 1000;
  double max_delta = 0.1;

  int size() const { return steps + 1; }
  double delta(int n) const { return max_delta * static_cast<double>(n) / steps; }
};

struct DephasingSet {
  std::vector<DephasingOp> ops;
  std::uint64_t seed = 0;
  std::uint64_t hamiltonian_hash = 0;
  int dim = 0;  // N
};

DephasingOp make_dephasing_op(const HamiltonianSS& h, const HermitianBasis& basis,
                              const Eigen::VectorXd& c_raw);

DephasingOp sample_dephasing_op(const HamiltonianSS& h, const HermitianBasis& basis, Rng& rng);

// Complete-positivity and model checks: nonnegative symmetric rates with
// zero diagonal, S negative semidefinite and trace preserving, [A, S] = 0.
CpReport validate_cp(const DephasingOp& op, const Eigen::MatrixXd& a_superop);

// Deterministic in (seed, H); every member passes validate_cp.
DephasingSet generate_set(const HamiltonianSS& h, const HermitianBasis& basis,
                          int count, std::uint64_t seed);

}  // namespace spinsense
