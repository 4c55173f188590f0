#pragma once

#include <span>
#include <string>
#include <vector>

namespace spinsense {

enum class Tail { Concordance, Discordance };
enum class Decision { RejectH0, FailToReject };

struct TauResult {
  double tau = 0.0;
  int n = 0;
  double z = 0.0;
  double p = 1.0;
  Tail tail = Tail::Concordance;
  Decision decision = Decision::FailToReject;
};

// Tie-corrected Kendall tau-b via merge-sort inversion counting, O(n log n).
// Throws on an all-tied input (tau undefined).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Normal-approximation one-tailed significance:
//   Z = tau / sqrt(2(2n+5) / (9 n (n-1))),  p = 1 - Phi(Z) or Phi(Z).
TauResult tau_significance(double tau, int n, Tail tail, double alpha = 0.05);

// Standard normal CDF to machine precision (via erfc).
double normal_cdf(double z);

// Per-controller robustness measures for one transfer problem.
struct ControllerMeasures {
  double e_T = 0.0;
  double s_a = 0.0;
  double s_k = 0.0;
  double rim1 = 0.0;      // RIM1 at the representative delta
  double zeta_a = 0.0;
  double zeta_k = 0.0;
  double rim1_adj = 0.0;  // adjusted RIM1 at the representative delta
};

struct MeasureTable {
  std::string problem;    // e.g. "chain-5-out3"
  std::string algorithm;  // "A" | "B" | "C"
  std::vector<ControllerMeasures> rows;
};

struct SuiteRow {
  std::string problem;
  std::string algorithm;
  std::string measure_pair;
  TauResult result;
};

struct HypothesisSuite {
  std::vector<SuiteRow> rows;
  double alpha = 0.05;
};

// Right-tailed concordance tests between robustness measures:
// (s_a, s_k), (s_a, RIM1), (s_k, RIM1) and the adjusted triple
// (zeta_a, zeta_k, adjusted RIM1) pairwise.
HypothesisSuite concordance_suite(const std::vector<MeasureTable>& tables,
                                  double alpha = 0.05);

// Left-tailed tests of each robustness measure against e(T)
// (robustness-performance trade-off).
HypothesisSuite tradeoff_suite(const std::vector<MeasureTable>& tables,
                               double alpha = 0.05);

}  // namespace spinsense
