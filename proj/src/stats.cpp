#include "spinsense/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace spinsense {

namespace {

// Inversion count of v via bottom-up merge sort.
std::uint64_t count_inversions(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> buf(n);
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
      std::size_t mid = lo + width;
      std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          inversions += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
      std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi),
                v.begin() + static_cast<long>(lo));
    }
  }
  return inversions;
}

// sum over equal-value runs of run*(run-1)/2
template <typename Pred>
std::uint64_t tie_pairs(std::size_t n, const Pred& same) {
  std::uint64_t total = 0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && same(i)) {
      ++run;
    } else {
      total += static_cast<std::uint64_t>(run) * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2)
    throw std::invalid_argument("kendall_tau needs two equal-length vectors, n >= 2");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = x[idx[i]];
    ys[i] = y[idx[i]];
  }

  const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const std::uint64_t ties_x = tie_pairs(n, [&](std::size_t i) { return xs[i] == xs[i - 1]; });
  const std::uint64_t ties_xy =
      tie_pairs(n, [&](std::size_t i) { return xs[i] == xs[i - 1] && ys[i] == ys[i - 1]; });

  std::vector<double> ysorted = ys;
  std::sort(ysorted.begin(), ysorted.end());
  const std::uint64_t ties_y =
      tie_pairs(n, [&](std::size_t i) { return ysorted[i] == ysorted[i - 1]; });

  if (ties_x == n0 || ties_y == n0)
    throw std::invalid_argument("kendall_tau undefined for an all-tied vector");

  const std::uint64_t swaps = count_inversions(ys);

  // concordant - discordant = n0 - ties_x - ties_y + ties_xy - 2 * swaps
  const std::int64_t num = static_cast<std::int64_t>(n0) - static_cast<std::int64_t>(ties_x) -
                           static_cast<std::int64_t>(ties_y) +
                           static_cast<std::int64_t>(ties_xy) -
                           2 * static_cast<std::int64_t>(swaps);
  // Single sqrt of the exact integer product keeps tie-free cases at +-1.
  const double denom =
      std::sqrt(static_cast<double>((n0 - ties_x) * (n0 - ties_y)));
  return static_cast<double>(num) / denom;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

TauResult tau_significance(double tau, int n, Tail tail, double alpha) {
  if (n < 2) throw std::invalid_argument("tau_significance needs n >= 2");
  TauResult r;
  r.tau = tau;
  r.n = n;
  r.tail = tail;
  const double sigma = std::sqrt(2.0 * (2.0 * n + 5.0) / (9.0 * n * (n - 1.0)));
  r.z = tau / sigma;
  r.p = (tail == Tail::Concordance) ? 1.0 - normal_cdf(r.z) : normal_cdf(r.z);
  r.decision = (r.p < alpha) ? Decision::RejectH0 : Decision::FailToReject;
  return r;
}

namespace {

using Getter = double (*)(const ControllerMeasures&);

std::vector<double> column(const MeasureTable& table, Getter get) {
  std::vector<double> v;
  v.reserve(table.rows.size());
  for (const auto& row : table.rows) v.push_back(get(row));
  return v;
}

void add_test(HypothesisSuite& suite, const MeasureTable& table, const std::string& pair,
              Getter a, Getter b, Tail tail) {
  std::vector<double> va = column(table, a);
  std::vector<double> vb = column(table, b);
  double tau = kendall_tau(va, vb);
  suite.rows.push_back({table.problem, table.algorithm, pair,
                        tau_significance(tau, static_cast<int>(va.size()), tail, suite.alpha)});
}

}  // namespace

HypothesisSuite concordance_suite(const std::vector<MeasureTable>& tables, double alpha) {
  HypothesisSuite suite;
  suite.alpha = alpha;
  for (const auto& t : tables) {
    if (t.rows.size() < 20)
      throw std::invalid_argument("concordance suite needs >= 20 controllers per test case");
    auto s_a = [](const ControllerMeasures& m) { return m.s_a; };
    auto s_k = [](const ControllerMeasures& m) { return m.s_k; };
    auto rim = [](const ControllerMeasures& m) { return m.rim1; };
    auto z_a = [](const ControllerMeasures& m) { return m.zeta_a; };
    auto z_k = [](const ControllerMeasures& m) { return m.zeta_k; };
    auto adj = [](const ControllerMeasures& m) { return m.rim1_adj; };
    add_test(suite, t, "s_a:s_k", s_a, s_k, Tail::Concordance);
    add_test(suite, t, "s_a:rim1", s_a, rim, Tail::Concordance);
    add_test(suite, t, "s_k:rim1", s_k, rim, Tail::Concordance);
    add_test(suite, t, "zeta_a:zeta_k", z_a, z_k, Tail::Concordance);
    add_test(suite, t, "zeta_a:rim1_adj", z_a, adj, Tail::Concordance);
    add_test(suite, t, "zeta_k:rim1_adj", z_k, adj, Tail::Concordance);
  }
  return suite;
}

HypothesisSuite tradeoff_suite(const std::vector<MeasureTable>& tables, double alpha) {
  HypothesisSuite suite;
  suite.alpha = alpha;
  for (const auto& t : tables) {
    if (t.rows.size() < 20)
      throw std::invalid_argument("tradeoff suite needs >= 20 controllers per test case");
    auto e = [](const ControllerMeasures& m) { return m.e_T; };
    add_test(suite, t, "s_a:e_T", [](const ControllerMeasures& m) { return m.s_a; }, e,
             Tail::Discordance);
    add_test(suite, t, "s_k:e_T", [](const ControllerMeasures& m) { return m.s_k; }, e,
             Tail::Discordance);
    add_test(suite, t, "rim1:e_T", [](const ControllerMeasures& m) { return m.rim1; }, e,
             Tail::Discordance);
    add_test(suite, t, "zeta_a:e_T", [](const ControllerMeasures& m) { return m.zeta_a; }, e,
             Tail::Discordance);
    add_test(suite, t, "zeta_k:e_T", [](const ControllerMeasures& m) { return m.zeta_k; }, e,
             Tail::Discordance);
    add_test(suite, t, "rim1_adj:e_T", [](const ControllerMeasures& m) { return m.rim1_adj; },
             e, Tail::Discordance);
  }
  return suite;
}

}  // namespace spinsense
