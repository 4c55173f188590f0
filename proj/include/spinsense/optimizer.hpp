#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "spinsense/network.hpp"

namespace spinsense {

// Three controller synthesis schemes:
//   A - quasi-Newton (BFGS) from uniform-random starting points
//   B - Nelder-Mead simplex direct search, same initialization
//   C - quasi-Newton from symmetry-informed starting points (biases
//       symmetric about the IN-OUT axis)
enum class Algorithm { A, B, C };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& s);

struct OptimizationConfig {
  Algorithm algorithm = Algorithm::A;
  int restarts = 300;
  double delta_bound = 10.0;   // |Delta_n| box constraint
  double t_min = 1e-2;
  double t_max = 0.0;          // 0 -> 3 N in units of 1/J
  std::uint64_t seed = 0;
  int keep = 100;              // population size after selection
};

struct ConvergenceInfo {
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
};

// e(T) = 1 - |<OUT| e^{-iTH} |IN>|^2 with exact gradient in (Delta, T) via
// the eigendecomposition divided-difference (Frechet) formula.
double transfer_error_and_gradient(const SpinNetwork& net, int output_spin,
                                   const Eigen::VectorXd& theta,  // Delta_1..N, T
                                   Eigen::VectorXd* grad);

Controller optimize_controller(const SpinNetwork& net, int output_spin,
                               const OptimizationConfig& config, int restart_index,
                               ConvergenceInfo* info = nullptr);

struct ControllerSet {
  SpinNetwork net;
  int output_spin = 0;
  OptimizationConfig config;
  std::vector<Controller> controllers;   // sorted by ascending e(T)
  std::vector<ConvergenceInfo> info;     // parallel to controllers
};

// Runs the configured restarts, deduplicates near-identical optima and keeps
// the best `keep` controllers. Throws if fewer distinct optima are found.
ControllerSet synthesize_set(const SpinNetwork& net, int output_spin,
                             const OptimizationConfig& config, int jobs = 1);

// Gauge fix: e(T) is invariant under a uniform bias shift, so controllers
// are canonicalized to min(Delta) = 0.
void canonicalize(Controller& ctrl);

}  // namespace spinsense
