#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "spinsense/common.hpp"
#include "spinsense/dephasing.hpp"
#include "spinsense/dynamics.hpp"
#include "spinsense/liouville.hpp"
#include "spinsense/network.hpp"
#include "spinsense/sensitivity.hpp"

using namespace spinsense;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Setup {
  HamiltonianSS h;
  HermitianBasis basis;
  LiouvilleSystem sys;
  ErrorEvaluator eval;
  double t;
};

Setup make_setup(Rng& rng) {
  SpinNetwork net{5, Topology::Chain, 1.0, 0.0};
  VectorXd biases(5);
  for (int i = 0; i < 5; ++i) biases(i) = rng.uniform(-5.0, 5.0);
  HamiltonianSS h = build_hamiltonian(net, {biases, 1.0, 1, 3, -1.0});
  HermitianBasis basis(5);
  LiouvilleSystem sys = LiouvilleSystem::build(h, 1, 3);
  ErrorEvaluator eval(h, 1, 3);
  return {std::move(h), std::move(basis), std::move(sys), std::move(eval),
          rng.uniform(1.0, 10.0)};
}

// Synthetic grid whose columns are exactly linear in delta.
ErrorGrid linear_grid(double e0, const VectorXd& slopes, const StrengthGrid& grid) {
  ErrorGrid g;
  g.grid = grid;
  g.values.resize(grid.size(), slopes.size());
  for (int n = 0; n < grid.size(); ++n)
    for (Eigen::Index mu = 0; mu < slopes.size(); ++mu)
      g.values(n, mu) = e0 + slopes(mu) * grid.delta(n);
  return g;
}

}  // namespace

TEST_SUITE("sensitivity") {

TEST_CASE("differential sensitivity matches central finite differences") {
  Rng rng(71);
  Setup s = make_setup(rng);
  double e_t = s.eval.nominal_error(s.t);
  const double h_fd = 1e-6;
  for (int trial = 0; trial < 30; ++trial) {
    DephasingOp op = sample_dephasing_op(s.h, s.basis, rng);
    double zeta = differential_sensitivity(s.sys, s.t, op.S);
    double fd = (s.eval.perturbed_error(s.t, op, h_fd) -
                 s.eval.perturbed_error(s.t, op, -h_fd)) /
                (2.0 * h_fd);
    CHECK(std::abs(zeta - fd) <= 1e-6 * std::max(1e-12, std::abs(zeta)));

    double ls = analytic_log_sensitivity(s.sys, s.t, op.S, e_t);
    CHECK(ls * e_t == doctest::Approx(zeta).epsilon(1e-12));

    // Fast block-structure path agrees with the vectorized form.
    CHECK(s.eval.error_derivative_at_zero(s.t, op) ==
          doctest::Approx(zeta).epsilon(1e-9));
  }
}

TEST_CASE("sensitivity is linear in the operator and vanishes for zero") {
  Rng rng(73);
  Setup s = make_setup(rng);
  MatrixXd zero = MatrixXd::Zero(25, 25);
  CHECK(differential_sensitivity(s.sys, s.t, zero) == 0.0);

  DephasingOp op = sample_dephasing_op(s.h, s.basis, rng);
  double z1 = differential_sensitivity(s.sys, s.t, op.S);
  double z3 = differential_sensitivity(s.sys, s.t, (3.0 * op.S).eval());
  CHECK(z3 == doctest::Approx(3.0 * z1).epsilon(1e-10));
}

TEST_CASE("two-level closed form derivative") {
  SpinNetwork net{2, Topology::Chain, 1.0, 0.0};
  HamiltonianSS h = build_hamiltonian(net, {VectorXd::Zero(2), 1.0, 1, 2, -1.0});
  HermitianBasis basis(2);
  LiouvilleSystem sys = LiouvilleSystem::build(h, 1, 2);
  Rng rng(79);
  DephasingOp op = sample_dephasing_op(h, basis, rng);

  // e(t, delta) = 1/2 + (1/2) cos(2t) e^{-t delta}; d/d delta at 0 is
  // -(t/2) cos(2t).
  for (double t : {0.4, 1.1, 2.9}) {
    double expected = -0.5 * t * std::cos(2.0 * t);
    CHECK(differential_sensitivity(sys, t, op.S) ==
          doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("log-sensitivity guards its preconditions") {
  Rng rng(83);
  Setup s = make_setup(rng);
  DephasingOp op = sample_dephasing_op(s.h, s.basis, rng);
  CHECK_THROWS_AS(analytic_log_sensitivity(s.sys, s.t, op.S, 1e-13), std::invalid_argument);

  MatrixXd bad = MatrixXd::Identity(25, 25);
  bad(1, 3) = 5.0;  // does not commute with A
  CHECK_THROWS_AS(analytic_log_sensitivity(s.sys, s.t, bad, 0.1), std::invalid_argument);
}

TEST_CASE("smoothing spline recovers synthetic derivatives") {
  StrengthGrid grid;
  VectorXd x(grid.size()), lin(grid.size()), quad(grid.size());
  for (int n = 0; n < grid.size(); ++n) {
    double d = grid.delta(n);
    x(n) = d;
    lin(n) = 0.1 + 0.5 * d;
    quad(n) = 0.1 + 0.5 * d + 3.0 * d * d;
  }

  SmoothingSpline s_lin = SmoothingSpline::fit(x, lin);
  CHECK(s_lin.derivative(0.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(s_lin.value(0.0) == doctest::Approx(0.1).epsilon(1e-6));

  SmoothingSpline s_quad = SmoothingSpline::fit(x, quad);
  CHECK(s_quad.derivative(0.0) == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("kernel density estimate behaves on known inputs") {
  StrengthGrid grid{2, 0.1};
  Rng rng(89);

  ErrorGrid g;
  g.grid = grid;
  g.values.resize(3, 1000);
  for (int mu = 0; mu < 1000; ++mu) {
    g.values(0, mu) = 0.25;  // constant row
    g.values(1, mu) = rng.uniform01();
    g.values(2, mu) = rng.uniform01();
  }

  SUBCASE("constant row collapses to a point mass") {
    KdeResult r = kde_error_density(g, 0);
    CHECK(r.point_mass);
    CHECK(r.location == 0.25);
  }

  SUBCASE("uniform samples give a flat density away from the boundary") {
    KdeResult r = kde_error_density(g, 1);
    REQUIRE_FALSE(r.point_mass);
    for (double e : {0.2, 0.35, 0.5, 0.65, 0.8})
      CHECK(std::abs(r.density(e) - 1.0) < 0.1);
  }

  SUBCASE("density integrates to one") {
    KdeResult r = kde_error_density(g, 1);
    double integral = 0.0;
    const int m = 4000;
    for (int i = 0; i <= m; ++i) {
      double e = -0.5 + 2.0 * i / m;
      double w = (i == 0 || i == m) ? 0.5 : 1.0;
      integral += w * r.density(e) * (2.0 / m);
    }
    CHECK(std::abs(integral - 1.0) < 1e-3);
  }
}

TEST_CASE("single-operator grid collapses the smoothed estimate to the analytic value") {
  Rng rng(97);
  Setup s = make_setup(rng);
  double e_t = s.eval.nominal_error(s.t);
  DephasingSet set = generate_set(s.h, s.basis, 1, 11);
  StrengthGrid grid;
  ErrorGrid g = compute_error_grid(s.eval, s.t, set, grid, 0, 1);
  KdeSensitivity ks = kde_log_sensitivity(g, e_t);
  double s_exact = analytic_log_sensitivity(s.sys, s.t, set.ops[0].S, e_t);
  CHECK(std::abs(ks.s_k - s_exact) < 0.01 * std::abs(s_exact));
  CHECK(ks.fd_crosscheck_ok);
}

TEST_CASE("smoothed derivative is local: truncating the grid barely moves it") {
  Rng rng(101);
  Setup s = make_setup(rng);
  double e_t = s.eval.nominal_error(s.t);
  DephasingSet set = generate_set(s.h, s.basis, 100, 13);
  ErrorGrid full = compute_error_grid(s.eval, s.t, set, StrengthGrid{1000, 0.1}, 0, 2);
  ErrorGrid trunc = compute_error_grid(s.eval, s.t, set, StrengthGrid{100, 0.01}, 0, 2);
  double sk_full = kde_log_sensitivity(full, e_t).s_k;
  double sk_trunc = kde_log_sensitivity(trunc, e_t).s_k;
  CHECK(std::abs(sk_full - sk_trunc) < 0.02 * std::abs(sk_full));
}

TEST_CASE("per-controller record keeps the algebraic identity exactly") {
  Rng rng(103);
  Setup s = make_setup(rng);
  DephasingSet set = generate_set(s.h, s.basis, 50, 17);
  ErrorGrid g = compute_error_grid(s.eval, s.t, set, StrengthGrid{200, 0.1}, 0, 2);
  SensitivityRecord rec = compute_sensitivity_record(s.eval, s.t, set, g, 0);
  REQUIRE_FALSE(rec.degenerate);
  CHECK(rec.zeta_a == rec.s_a * rec.e_T);  // bitwise identity by construction
  CHECK(rec.s_a == doctest::Approx(kahan_mean(std::vector<double>(
                       rec.per_op_s.data(), rec.per_op_s.data() + rec.per_op_s.size())))
                       .epsilon(1e-15));
  // Value agreement between the analytic mean and the smoothed estimate.
  CHECK(std::abs(rec.s_k - rec.s_a) < 0.05 * std::abs(rec.s_a));
}

TEST_CASE("near-perfect controllers are flagged degenerate") {
  SpinNetwork net{2, Topology::Chain, 1.0, 0.0};
  HamiltonianSS h = build_hamiltonian(net, {VectorXd::Zero(2), 1.0, 1, 2, -1.0});
  HermitianBasis basis(2);
  ErrorEvaluator eval(h, 1, 2);
  double t = M_PI / 2.0;
  REQUIRE(eval.nominal_error(t) < 1e-10);
  DephasingSet set = generate_set(h, basis, 10, 19);
  ErrorGrid g = compute_error_grid(eval, t, set, StrengthGrid{100, 0.1}, 0, 1);
  SensitivityRecord rec = compute_sensitivity_record(eval, t, set, g, 0);
  CHECK(rec.degenerate);
  CHECK(rec.zeta_a > 0.0);  // differential sensitivity stays defined
}

TEST_CASE("row means are exact on synthetic data") {
  StrengthGrid grid{10, 0.1};
  VectorXd slopes(4);
  slopes << 0.1, 0.2, 0.3, 0.4;
  ErrorGrid g = linear_grid(0.05, slopes, grid);
  VectorXd means = grid_row_means(g);
  for (int n = 0; n <= 10; ++n)
    CHECK(means(n) == doctest::Approx(0.05 + 0.25 * grid.delta(n)).epsilon(1e-15));
}

}  // TEST_SUITE
