#include "spinsense/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinsense/common.hpp"

namespace spinsense {

namespace {

constexpr double kDegenerateErrorFloor = 1e-12;

// Pentadiagonal symmetric positive-definite system in LDL^T band form,
// plus the central bands of the inverse (Takahashi recurrence) for the
// trace of the smoother matrix.
struct BandSystem {
  Eigen::VectorXd d;   // D_i
  Eigen::VectorXd e;   // L_{i+1,i}
  Eigen::VectorXd f;   // L_{i+2,i}

  static BandSystem factor(const Eigen::VectorXd& b0, const Eigen::VectorXd& b1,
                           const Eigen::VectorXd& b2) {
    const int m = static_cast<int>(b0.size());
    BandSystem s;
    s.d.resize(m);
    s.e = Eigen::VectorXd::Zero(std::max(m - 1, 0));
    s.f = Eigen::VectorXd::Zero(std::max(m - 2, 0));
    for (int i = 0; i < m; ++i) {
      double di = b0(i);
      if (i >= 1) di -= s.e(i - 1) * s.e(i - 1) * s.d(i - 1);
      if (i >= 2) di -= s.f(i - 2) * s.f(i - 2) * s.d(i - 2);
      s.d(i) = di;
      if (i + 1 < m) {
        double v = b1(i);
        if (i >= 1) v -= s.f(i - 1) * s.e(i - 1) * s.d(i - 1);
        s.e(i) = v / di;
      }
      if (i + 2 < m) s.f(i) = b2(i) / di;
    }
    return s;
  }

  Eigen::VectorXd solve(Eigen::VectorXd rhs) const {
    const int m = static_cast<int>(d.size());
    for (int i = 0; i < m; ++i) {
      if (i >= 1) rhs(i) -= e(i - 1) * rhs(i - 1);
      if (i >= 2) rhs(i) -= f(i - 2) * rhs(i - 2);
    }
    for (int i = 0; i < m; ++i) rhs(i) /= d(i);
    for (int i = m - 1; i >= 0; --i) {
      if (i + 1 < m) rhs(i) -= e(i) * rhs(i + 1);
      if (i + 2 < m) rhs(i) -= f(i) * rhs(i + 2);
    }
    return rhs;
  }

  // Central bands of the inverse: z0 diagonal, z1 first, z2 second band.
  void inverse_bands(Eigen::VectorXd& z0, Eigen::VectorXd& z1, Eigen::VectorXd& z2) const {
    const int m = static_cast<int>(d.size());
    z0.setZero(m);
    z1.setZero(std::max(m - 1, 0));
    z2.setZero(std::max(m - 2, 0));
    for (int i = m - 1; i >= 0; --i) {
      if (i + 2 < m) z2(i) = -e(i) * z1(i + 1) - f(i) * z0(i + 2);
      if (i + 1 < m) z1(i) = -e(i) * z0(i + 1) - (i + 2 < m ? f(i) * z1(i + 1) : 0.0);
      z0(i) = 1.0 / d(i);
      if (i + 1 < m) z0(i) -= e(i) * z1(i);
      if (i + 2 < m) z0(i) -= f(i) * z2(i);
    }
  }
};

struct ReinschFit {
  Eigen::VectorXd f;       // fitted values at knots
  Eigen::VectorXd gamma;   // second derivatives at interior knots
  double rss = 0.0;
  double trace_h = 0.0;
};

// One Reinsch fit: (T + lambda Q^T Q) gamma = Q^T y, f = y - lambda Q gamma.
ReinschFit reinsch(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double lambda,
                   bool need_trace) {
  const int n = static_cast<int>(x.size());
  const int m = n - 2;
  Eigen::VectorXd h(n - 1);
  for (int i = 0; i + 1 < n; ++i) h(i) = x(i + 1) - x(i);

  // Q columns: (1/h_i, -(1/h_i + 1/h_{i+1}), 1/h_{i+1}) at rows i, i+1, i+2.
  auto q0 = [&](int i) { return 1.0 / h(i); };
  auto q1 = [&](int i) { return -(1.0 / h(i) + 1.0 / h(i + 1)); };
  auto q2 = [&](int i) { return 1.0 / h(i + 1); };

  Eigen::VectorXd b0(m), b1(std::max(m - 1, 0)), b2(std::max(m - 2, 0));
  for (int i = 0; i < m; ++i) {
    double t_ii = (h(i) + h(i + 1)) / 3.0;
    b0(i) = t_ii + lambda * (q0(i) * q0(i) + q1(i) * q1(i) + q2(i) * q2(i));
    if (i + 1 < m) {
      double t_io = h(i + 1) / 6.0;
      b1(i) = t_io + lambda * (q1(i) * q0(i + 1) + q2(i) * q1(i + 1));
    }
    if (i + 2 < m) b2(i) = lambda * q2(i) * q0(i + 2);
  }

  Eigen::VectorXd rhs(m);
  for (int i = 0; i < m; ++i)
    rhs(i) = q0(i) * y(i) + q1(i) * y(i + 1) + q2(i) * y(i + 2);

  BandSystem sys = BandSystem::factor(b0, b1, b2);
  ReinschFit fit;
  fit.gamma = sys.solve(rhs);

  Eigen::VectorXd qg = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    qg(i) += q0(i) * fit.gamma(i);
    qg(i + 1) += q1(i) * fit.gamma(i);
    qg(i + 2) += q2(i) * fit.gamma(i);
  }
  fit.f = y - lambda * qg;
  fit.rss = (lambda * qg).squaredNorm();

  if (need_trace) {
    Eigen::VectorXd z0, z1, z2;
    sys.inverse_bands(z0, z1, z2);
    // tr(H) = n - lambda * sum_j q_j^T B^{-1} q_j over rows q_j of Q.
    double s = 0.0;
    for (int j = 0; j < n; ++j) {
      // nonzero columns of row j: i in {j-2, j-1, j} within [0, m)
      int lo = std::max(0, j - 2);
      int hi = std::min(m - 1, j);
      for (int i = lo; i <= hi; ++i) {
        double qji = (i == j) ? q0(i) : (i == j - 1 ? q1(i) : q2(i));
        for (int i2 = lo; i2 <= hi; ++i2) {
          double qji2 = (i2 == j) ? q0(i2) : (i2 == j - 1 ? q1(i2) : q2(i2));
          int a = std::min(i, i2), b = std::max(i, i2);
          double z = (b - a == 0) ? z0(a) : (b - a == 1 ? z1(a) : z2(a));
          s += qji * qji2 * z;
        }
      }
    }
    fit.trace_h = n - lambda * s;
  }
  return fit;
}

}  // namespace

SmoothingSpline SmoothingSpline::fit_with_penalty(const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& y,
                                                  double lambda) {
  if (x.size() != y.size() || x.size() < 3)
    throw std::invalid_argument("smoothing spline needs >= 3 matching points");
  ReinschFit r = reinsch(x, y, lambda, false);
  SmoothingSpline s;
  s.x_ = x;
  s.f_ = r.f;
  s.m_ = Eigen::VectorXd::Zero(x.size());
  s.m_.segment(1, x.size() - 2) = r.gamma;  // natural boundary: M_0 = M_{n-1} = 0
  s.lambda_ = lambda;
  return s;
}

SmoothingSpline SmoothingSpline::fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 4)
    throw std::invalid_argument("smoothing spline needs >= 4 matching points");
  const int n = static_cast<int>(x.size());
  const double h_mean = (x(n - 1) - x(0)) / (n - 1);

  // GCV over a log-spaced penalty grid centered on the h^4 crossover scale
  // where the roughness term and the data term balance.
  const double center = std::pow(h_mean, 4);
  double best_lambda = center;
  double best_gcv = std::numeric_limits<double>::infinity();
  const int points = 61;
  for (int i = 0; i < points; ++i) {
    double expo = -10.0 + 22.0 * static_cast<double>(i) / (points - 1);
    double lambda = center * std::pow(10.0, expo);
    ReinschFit r = reinsch(x, y, lambda, true);
    double denom = static_cast<double>(n) - r.trace_h;
    if (denom <= 0.0) continue;
    double gcv = static_cast<double>(n) * r.rss / (denom * denom);
    if (gcv < best_gcv) {
      best_gcv = gcv;
      best_lambda = lambda;
    }
  }
  SmoothingSpline s = fit_with_penalty(x, y, best_lambda);
  s.gcv_ = best_gcv;
  return s;
}

double SmoothingSpline::value(double x) const {
  const int n = static_cast<int>(x_.size());
  double xc = std::clamp(x, x_(0), x_(n - 1));
  int i = static_cast<int>(std::upper_bound(x_.data(), x_.data() + n, xc) - x_.data()) - 1;
  i = std::clamp(i, 0, n - 2);
  double h = x_(i + 1) - x_(i);
  double a = x_(i + 1) - xc, b = xc - x_(i);
  return f_(i) * a / h + f_(i + 1) * b / h +
         (a * a * a / (6.0 * h) - h * a / 6.0) * m_(i) +
         (b * b * b / (6.0 * h) - h * b / 6.0) * m_(i + 1);
}

double SmoothingSpline::derivative(double x) const {
  const int n = static_cast<int>(x_.size());
  double xc = std::clamp(x, x_(0), x_(n - 1));
  int i = static_cast<int>(std::upper_bound(x_.data(), x_.data() + n, xc) - x_.data()) - 1;
  i = std::clamp(i, 0, n - 2);
  double h = x_(i + 1) - x_(i);
  double a = x_(i + 1) - xc, b = xc - x_(i);
  return (f_(i + 1) - f_(i)) / h +
         (-3.0 * a * a / (6.0 * h) + h / 6.0) * m_(i) +
         (3.0 * b * b / (6.0 * h) - h / 6.0) * m_(i + 1);
}

double KdeResult::density(double e) const {
  if (point_mass) return e == location ? std::numeric_limits<double>::infinity() : 0.0;
  double s = 0.0;
  const double inv = 1.0 / bandwidth;
  for (double v : samples) {
    double u = (e - v) * inv;
    s += std::exp(-0.5 * u * u);
  }
  return s * inv / (std::sqrt(2.0 * M_PI) * static_cast<double>(samples.size()));
}

double KdeResult::mean() const {
  if (point_mass) return location;
  return kahan_mean(samples);
}

KdeResult kde_error_density(const ErrorGrid& grid, int delta_index) {
  if (delta_index < 0 || delta_index >= grid.grid.size())
    throw std::invalid_argument("delta index out of range");
  KdeResult kde;
  const auto row = grid.values.row(delta_index);
  kde.samples.assign(row.begin(), row.end());
  const std::size_t n = kde.samples.size();

  double mean = kahan_mean(kde.samples);
  double var = 0.0;
  for (double v : kde.samples) var += (v - mean) * (v - mean);
  var /= std::max<std::size_t>(n - 1, 1);
  if (var <= 0.0) {
    kde.point_mass = true;
    kde.location = mean;
    return kde;
  }

  // Silverman: 0.9 min(sigma, IQR/1.349) n^{-1/5}
  std::vector<double> sorted = kde.samples;
  std::sort(sorted.begin(), sorted.end());
  double q1 = sorted[n / 4], q3 = sorted[(3 * n) / 4];
  double sigma = std::sqrt(var);
  double spread = std::min(sigma, (q3 - q1) / 1.349);
  if (spread <= 0.0) spread = sigma;
  kde.bandwidth = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  return kde;
}

Eigen::VectorXd grid_row_means(const ErrorGrid& grid) {
  Eigen::VectorXd means(grid.values.rows());
  std::vector<double> row(static_cast<std::size_t>(grid.values.cols()));
  for (Eigen::Index r = 0; r < grid.values.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.values.cols(); ++c)
      row[static_cast<std::size_t>(c)] = grid.values(r, c);
    // Summing in sorted order makes the mean bit-identical under any
    // permutation of the operator set.
    std::sort(row.begin(), row.end());
    KahanSum s;
    for (double v : row) s.add(v);
    means(r) = s.value() / static_cast<double>(grid.values.cols());
  }
  return means;
}

SmoothingSpline smooth_mean_error(const ErrorGrid& grid) {
  Eigen::VectorXd x(grid.grid.size());
  for (int n = 0; n < grid.grid.size(); ++n) x(n) = grid.grid.delta(n);
  return SmoothingSpline::fit(x, grid_row_means(grid));
}

double differential_sensitivity(const LiouvilleSystem& sys, double t,
                                const Eigen::MatrixXd& s_mu) {
  Eigen::MatrixXd u = (t * sys.A).exp();
  return -(sys.c * u * (t * s_mu) * sys.r0)(0, 0);
}

double analytic_log_sensitivity(const LiouvilleSystem& sys, double t,
                                const Eigen::MatrixXd& s_mu, double e_t) {
  if (e_t < kDegenerateErrorFloor)
    throw std::invalid_argument("log-sensitivity undefined for (near-)perfect fidelity");
  double scale = std::max(1.0, sys.A.cwiseAbs().maxCoeff() * s_mu.cwiseAbs().maxCoeff());
  if ((sys.A * s_mu - s_mu * sys.A).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw std::invalid_argument("analytic form requires [A, S] = 0");
  return differential_sensitivity(sys, t, s_mu) / e_t;
}

KdeSensitivity kde_log_sensitivity(const ErrorGrid& grid, double e_t) {
  if (e_t < kDegenerateErrorFloor)
    throw std::invalid_argument("log-sensitivity undefined for (near-)perfect fidelity");
  KdeSensitivity out;
  SmoothingSpline spline = smooth_mean_error(grid);
  out.zeta_k = spline.derivative(0.0);
  out.s_k = out.zeta_k / e_t;

  // Cross-check against a 5-point one-sided stencil on the raw means.
  Eigen::VectorXd means = grid_row_means(grid);
  double h = grid.grid.delta(1) - grid.grid.delta(0);
  double fd = (-25.0 * means(0) + 48.0 * means(1) - 36.0 * means(2) + 16.0 * means(3) -
               3.0 * means(4)) / (12.0 * h);
  double ref = std::max(std::abs(fd), 1e-300);
  out.fd_crosscheck_ok = std::abs(out.zeta_k - fd) <= 0.05 * ref;
  return out;
}

SensitivityRecord compute_sensitivity_record(const ErrorEvaluator& eval, double t,
                                             const DephasingSet& set,
                                             const ErrorGrid& grid,
                                             int controller_id) {
  SensitivityRecord rec;
  rec.controller_id = controller_id;
  rec.e_T = eval.nominal_error(t);

  const int m = static_cast<int>(set.ops.size());
  Eigen::VectorXd zetas(m);
  for (int i = 0; i < m; ++i)
    zetas(i) = eval.error_derivative_at_zero(t, set.ops[i]);

  rec.degenerate = rec.e_T < 1e-10;
  if (rec.degenerate) {
    // Log-sensitivity is excluded for near-perfect controllers; the
    // differential sensitivities remain well defined.
    KahanSum zs;
    for (int i = 0; i < m; ++i) zs.add(zetas(i));
    rec.zeta_a = zs.value() / m;
    SmoothingSpline spline = smooth_mean_error(grid);
    rec.zeta_k = spline.derivative(0.0);
    return rec;
  }

  rec.per_op_s = zetas / rec.e_T;
  KahanSum ss;
  for (int i = 0; i < m; ++i) ss.add(rec.per_op_s(i));
  rec.s_a = ss.value() / m;
  rec.zeta_a = rec.s_a * rec.e_T;  // identity by construction

  KdeSensitivity k = kde_log_sensitivity(grid, rec.e_T);
  rec.s_k = k.s_k;
  rec.zeta_k = k.zeta_k;
  rec.fd_crosscheck_ok = k.fd_crosscheck_ok;
  return rec;
}

}  // namespace spinsense
