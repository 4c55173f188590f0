#include "spinsense/network.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "spinsense/common.hpp"

namespace spinsense {

Eigen::MatrixXd HamiltonianSS::projector(int group) const {
  const auto& idx = groups.at(static_cast<std::size_t>(group));
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(dim(), dim());
  for (int j : idx) {
    p.noalias() += eigenvectors.col(j) * eigenvectors.col(j).transpose();
  }
  return p;
}

namespace {

// Nonzero couplings per topology: nearest neighbours, plus the (1, N) edge
// for rings.
std::vector<std::pair<int, int>> edges(const SpinNetwork& net) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < net.size; ++i) e.emplace_back(i, i + 1);
  if (net.topology == Topology::Ring && net.size > 2) e.emplace_back(0, net.size - 1);
  return e;
}

}  // namespace

HamiltonianSS build_hamiltonian(const SpinNetwork& net, const Controller& ctrl) {
  if (net.size < 2) throw std::invalid_argument("network size must be >= 2");
  if (ctrl.biases.size() != net.size)
    throw std::invalid_argument("bias vector length does not match network size");
  if (ctrl.output_spin < 1 || ctrl.output_spin > net.size)
    throw std::invalid_argument("output spin out of range");

  const int n = net.size;
  HamiltonianSS h;
  h.matrix = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) h.matrix(i, i) = ctrl.biases(i);
  for (auto [i, j] : edges(net)) {
    h.matrix(i, j) = net.coupling;
    h.matrix(j, i) = net.coupling;  // built from both triangles, bitwise symmetric
  }
  if (net.kappa != 0.0) {
    // ZZ contribution restricted to the single-excitation subspace: each edge
    // shifts state |k> by +J kappa if k is outside the edge, -J kappa if on it.
    for (auto [i, j] : edges(net)) {
      for (int k = 0; k < n; ++k) {
        h.matrix(k, k) += net.kappa * net.coupling * ((k == i || k == j) ? -1.0 : 1.0);
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h.matrix);
  if (solver.info() != Eigen::Success)
    throw NumericalIntegrityError("eigendecomposition failed");
  h.eigenvalues = solver.eigenvalues();
  h.eigenvectors = solver.eigenvectors();

  // Group eigenvalues within 1e-10 * ||H||_2 into shared eigenspaces.
  const double norm2 = h.eigenvalues.cwiseAbs().maxCoeff();
  const double tol = 1e-10 * std::max(norm2, 1.0);
  std::vector<double> reps;
  for (int i = 0; i < n; ++i) {
    if (h.groups.empty() || h.eigenvalues(i) - h.eigenvalues(static_cast<int>(
                                h.groups.back().front())) > tol) {
      h.groups.push_back({i});
    } else {
      h.groups.back().push_back(i);
    }
  }
  h.group_values.resize(static_cast<int>(h.groups.size()));
  for (std::size_t g = 0; g < h.groups.size(); ++g) {
    double sum = 0.0;
    for (int j : h.groups[g]) sum += h.eigenvalues(j);
    h.group_values(static_cast<int>(g)) = sum / static_cast<double>(h.groups[g].size());
  }
  return h;
}

std::vector<int> transfer_targets(const SpinNetwork& net) {
  std::vector<int> out;
  if (net.topology == Topology::Chain) {
    out.push_back(net.size / 2 + 1);
    if (net.size != net.size / 2 + 1) out.push_back(net.size);
  } else {
    int last = (net.size + 1) / 2;
    for (int k = 2; k <= last; ++k) out.push_back(k);
  }
  return out;
}

std::uint64_t hamiltonian_hash(const Eigen::MatrixXd& h) {
  return fnv1a(h.data(), sizeof(double) * static_cast<std::size_t>(h.size()));
}

}  // namespace spinsense
