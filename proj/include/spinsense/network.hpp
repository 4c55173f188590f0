#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace spinsense {

enum class Topology { Chain, Ring };

// XX spin network with uniform nearest-neighbour coupling. kappa is the
// ZZ-coupling coefficient; it is zero throughout this work but kept so the
// Hamiltonian builder stays honest about the model family.
struct SpinNetwork {
  int size = 0;
  Topology topology = Topology::Chain;
  double coupling = 1.0;
  double kappa = 0.0;
};

// Static bias-field controller: energy shifts per spin plus a readout time.
// Spin indices are 1-based.
struct Controller {
  Eigen::VectorXd biases;
  double readout_time = 0.0;
  int input_spin = 1;
  int output_spin = 1;
  double nominal_error = -1.0;  // cached after evaluation, < 0 means unset
};

// Single-excitation-subspace Hamiltonian with its eigendecomposition.
// Eigenvalues within a relative tolerance of the spectral norm are grouped
// into shared eigenspaces so that dephasing operators built on the
// projectors commute with the Hamiltonian even for degenerate spectra.
struct HamiltonianSS {
  Eigen::MatrixXd matrix;        // N x N, exactly symmetric
  Eigen::VectorXd eigenvalues;   // ascending, one per eigenvector column
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
  std::vector<std::vector<int>> groups;  // eigenvector indices per eigenspace
  Eigen::VectorXd group_values;          // representative eigenvalue per group

  int dim() const { return static_cast<int>(matrix.rows()); }
  int num_groups() const { return static_cast<int>(groups.size()); }

  // Rank-d_k projector onto the k-th (possibly degenerate) eigenspace.
  Eigen::MatrixXd projector(int group) const;
};

HamiltonianSS build_hamiltonian(const SpinNetwork& net, const Controller& ctrl);

// Output spins studied per topology: chains transfer 1 -> {floor(N/2)+1, N},
// rings 1 -> {2, ..., ceil(N/2)} (the rest follow by symmetry).
std::vector<int> transfer_targets(const SpinNetwork& net);

// Digest of the Hamiltonian entries; binds dephasing sets to one H.
std::uint64_t hamiltonian_hash(const Eigen::MatrixXd& h);

}  // namespace spinsense
