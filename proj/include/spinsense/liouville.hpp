#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinsense/network.hpp"

namespace spinsense {

// Trace-orthonormal Hermitian basis of C^{NxN}: identity component first,
// then the generalized Gell-Mann matrices, all normalized to Tr(s_j s_k) =
// delta_jk. With this normalization the state overlap Tr(rho1 rho2) is a
// plain dot product of the coefficient vectors.
class HermitianBasis {
 public:
  explicit HermitianBasis(int n);

  int dim() const { return n_; }
  int size() const { return static_cast<int>(mats_.size()); }  // N^2
  const Eigen::MatrixXcd& operator[](int k) const { return mats_[k]; }
  const std::vector<Eigen::MatrixXcd>& matrices() const { return mats_; }

 private:
  int n_;
  std::vector<Eigen::MatrixXcd> mats_;
};

// A_kl = Tr(i H [s_k, s_l]); real antisymmetric, generates the coherent flow.
Eigen::MatrixXd hamiltonian_superop(const Eigen::MatrixXd& h, const HermitianBasis& basis);

// Pure-dephasing generator for Hermitian V:
//   S_kl = Tr(V s_k V s_l) - 1/2 Tr(V^2 (s_k s_l + s_l s_k)).
// Real symmetric, negative semidefinite, annihilates the identity component.
Eigen::MatrixXd dephasing_superop(const Eigen::MatrixXcd& v, const HermitianBasis& basis);

// Coherence-vector coordinates r_k = Tr(rho s_k) and their inverse.
Eigen::VectorXd vectorize(const Eigen::MatrixXcd& rho, const HermitianBasis& basis);
Eigen::MatrixXcd devectorize(const Eigen::VectorXd& r, const HermitianBasis& basis);

// The real LTI picture of one transfer problem: dr/dt = (A + delta S) r.
struct LiouvilleSystem {
  HermitianBasis basis;
  Eigen::MatrixXd A;      // N^2 x N^2
  Eigen::VectorXd r0;     // vectorized |IN><IN|
  Eigen::RowVectorXd c;   // transpose of vectorized |OUT><OUT|

  static LiouvilleSystem build(const HamiltonianSS& h, int input_spin, int output_spin);
};

}  // namespace spinsense
