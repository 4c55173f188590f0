#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <unsupported/Eigen/MatrixFunctions>

#include "spinsense/common.hpp"
#include "spinsense/dephasing.hpp"
#include "spinsense/dynamics.hpp"
#include "spinsense/liouville.hpp"
#include "spinsense/network.hpp"

using namespace spinsense;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Problem {
  HamiltonianSS h;
  HermitianBasis basis;
  LiouvilleSystem sys;
  int in, out;
};

Problem random_problem(int n, Topology topo, Rng& rng, int out) {
  SpinNetwork net{n, topo, 1.0, 0.0};
  VectorXd biases(n);
  for (int i = 0; i < n; ++i) biases(i) = rng.uniform(-5.0, 5.0);
  HamiltonianSS h = build_hamiltonian(net, {biases, 1.0, 1, out, -1.0});
  HermitianBasis basis(n);
  LiouvilleSystem sys = LiouvilleSystem::build(h, 1, out);
  return {std::move(h), std::move(basis), std::move(sys), 1, out};
}

double purity(const MatrixXcd& rho) { return (rho * rho).trace().real(); }

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("clamping distinguishes float noise from real violations") {
  ClampStats stats;
  CHECK(clamp_error(-5e-10, &stats) == 0.0);
  CHECK(stats.clamped == 1);
  CHECK(clamp_error(0.3, &stats) == 0.3);
  CHECK(stats.clamped == 1);
  CHECK_THROWS_AS(clamp_error(-1e-6), NumericalIntegrityError);
  CHECK_THROWS_AS(clamp_error(1.0 + 1e-6), NumericalIntegrityError);
}

TEST_CASE("vectorized propagation preserves norm at zero strength and is identity at t=0") {
  Rng rng(3);
  Problem p = random_problem(4, Topology::Chain, rng, 3);
  DephasingOp op = sample_dephasing_op(p.h, p.basis, rng);

  VectorXd r = propagate_lti(p.sys.A, op.S, 0.0, 3.7, p.sys.r0);
  CHECK(r.norm() == doctest::Approx(p.sys.r0.norm()).epsilon(1e-12));

  VectorXd r0 = propagate_lti(p.sys.A, op.S, 0.05, 0.0, p.sys.r0);
  CHECK((r0 - p.sys.r0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("factored and full-generator exponentials agree on commuting pairs") {
  Rng rng(7);
  Problem p = random_problem(5, Topology::Chain, rng, 3);
  for (int trial = 0; trial < 10; ++trial) {
    DephasingOp op = sample_dephasing_op(p.h, p.basis, rng);
    double delta = rng.uniform(0.0, 0.1);
    double t = rng.uniform(0.0, 15.0);
    VectorXd fast = propagate_lti(p.sys.A, op.S, delta, t, p.sys.r0, true);
    // Knock out the fast path by perturbing nothing; the generic entry point
    // picks Pade when the commutator check is defeated, so compare against a
    // manually formed full generator instead.
    VectorXd full = ((t * (p.sys.A + delta * op.S)).exp() * p.sys.r0).eval();
    CHECK((fast - full).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("forcing the fast path on a non-commuting pair is an error") {
  Rng rng(13);
  Problem p = random_problem(3, Topology::Chain, rng, 2);
  MatrixXd s = -MatrixXd::Identity(9, 9);
  s(1, 2) = 0.5;
  s(2, 1) = 0.5;
  s(0, 0) = 0.0;
  CHECK_THROWS(propagate_lti(p.sys.A, s, 0.05, 1.0, p.sys.r0, true));
}

TEST_CASE("eigenprojector and vectorized trajectories coincide") {
  Rng rng(19);
  for (int n = 2; n <= 6; ++n) {
    Topology topo = (n % 2 == 0) ? Topology::Ring : Topology::Chain;
    Problem p = random_problem(n, topo, rng, 2);
    MatrixXcd rho0 = MatrixXcd::Zero(n, n);
    rho0(0, 0) = 1.0;
    for (int trial = 0; trial < 50; ++trial) {
      DephasingOp op = sample_dephasing_op(p.h, p.basis, rng);
      double delta = rng.uniform(0.0, 0.1);
      double t = rng.uniform(0.0, 20.0);
      MatrixXcd rho_t = propagate_eigen(p.h, op, delta, t, rho0);
      VectorXd r_lti = propagate_lti(p.sys.A, op.S, delta, t, p.sys.r0);
      CHECK((vectorize(rho_t, p.basis) - r_lti).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("eigenprojector propagation keeps the state physical") {
  Rng rng(29);
  Problem p = random_problem(5, Topology::Ring, rng, 3);
  DephasingOp op = sample_dephasing_op(p.h, p.basis, rng);
  MatrixXcd rho0 = MatrixXcd::Zero(5, 5);
  rho0(0, 0) = 1.0;

  SUBCASE("unitary limit preserves purity") {
    MatrixXcd rho = propagate_eigen(p.h, op, 0.0, 4.2, rho0);
    CHECK(purity(rho) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
  }

  SUBCASE("purity never increases under dephasing") {
    double last = 1.0;
    for (double t : {0.1, 0.5, 1.0, 3.0, 10.0, 50.0}) {
      MatrixXcd rho = propagate_eigen(p.h, op, 0.05, t, rho0);
      double pu = purity(rho);
      CHECK(pu <= last + 1e-12);
      CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
      last = pu;
    }
  }

  SUBCASE("long-time limit is diagonal in the hamiltonian eigenbasis") {
    MatrixXcd rho = propagate_eigen(p.h, op, 0.05, 1e6, rho0);
    MatrixXcd in_eigen = p.h.eigenvectors.transpose().cast<std::complex<double>>() * rho *
                         p.h.eigenvectors.cast<std::complex<double>>();
    MatrixXcd offdiag = in_eigen - MatrixXcd(in_eigen.diagonal().asDiagonal());
    CHECK(offdiag.cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("nominal error boundary cases") {
  SpinNetwork net{3, Topology::Chain, 1.0, 0.0};
  HamiltonianSS h = build_hamiltonian(net, {VectorXd::Zero(3), 1.0, 1, 3, -1.0});

  ErrorEvaluator same(h, 1, 1);
  CHECK(same.nominal_error(0.0) == doctest::Approx(0.0).epsilon(1e-14));

  ErrorEvaluator diff(h, 1, 3);
  CHECK(diff.nominal_error(0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("two-level swap is perfect at a quarter period") {
  SpinNetwork net{2, Topology::Chain, 1.0, 0.0};
  HamiltonianSS h = build_hamiltonian(net, {VectorXd::Zero(2), 1.0, 1, 2, -1.0});
  ErrorEvaluator eval(h, 1, 2);
  CHECK(eval.nominal_error(M_PI / 2.0) < 1e-12);
}

TEST_CASE("two-level transfer under dephasing matches the closed form") {
  SpinNetwork net{2, Topology::Chain, 1.0, 0.0};
  HamiltonianSS h = build_hamiltonian(net, {VectorXd::Zero(2), 1.0, 1, 2, -1.0});
  HermitianBasis basis(2);
  ErrorEvaluator eval(h, 1, 2);
  Rng rng(41);
  DephasingOp op = sample_dephasing_op(h, basis, rng);
  REQUIRE(op.rates(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

  // e(t, delta) = 1/2 + (1/2) cos(2t) e^{-t delta} for the unit-coupling
  // two-level transfer with peak dephasing rate 1.
  for (double t : {0.3, 1.0, 2.5}) {
    for (double delta : {0.0, 0.02, 0.1}) {
      double expected = 0.5 + 0.5 * std::cos(2.0 * t) * std::exp(-t * delta);
      CHECK(eval.perturbed_error(t, op, delta) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero strength reproduces the nominal error bit for bit") {
  Rng rng(47);
  Problem p = random_problem(5, Topology::Chain, rng, 5);
  ErrorEvaluator eval(p.h, 1, 5);
  DephasingOp op = sample_dephasing_op(p.h, p.basis, rng);
  for (double t : {0.5, 2.0, 9.0})
    CHECK(eval.perturbed_error(t, op, 0.0) == eval.nominal_error(t));
}

TEST_CASE("error grid layout and spot checks") {
  Rng rng(53);
  Problem p = random_problem(5, Topology::Ring, rng, 3);
  ErrorEvaluator eval(p.h, 1, 3);
  DephasingSet set = generate_set(p.h, p.basis, 20, 99);
  StrengthGrid grid{100, 0.1};
  double t = 6.0;
  ErrorGrid egrid = compute_error_grid(eval, t, set, grid, 0, 2);

  REQUIRE(egrid.values.rows() == 101);
  REQUIRE(egrid.values.cols() == 20);

  double nominal = eval.nominal_error(t);
  for (int mu = 0; mu < 20; ++mu) CHECK(egrid.values(0, mu) == nominal);

  for (int check = 0; check < 100; ++check) {
    int n = static_cast<int>(rng.next_u64() % 101);
    int mu = static_cast<int>(rng.next_u64() % 20);
    double direct = eval.perturbed_error(t, set.ops[mu], grid.delta(n));
    CHECK(std::abs(egrid.values(n, mu) - direct) < 1e-12);
  }
}

TEST_CASE("single-operator grid matches pointwise evaluation") {
  Rng rng(61);
  Problem p = random_problem(4, Topology::Chain, rng, 4);
  ErrorEvaluator eval(p.h, 1, 4);
  DephasingSet set = generate_set(p.h, p.basis, 1, 5);
  StrengthGrid grid{2, 0.1};
  ErrorGrid egrid = compute_error_grid(eval, 3.0, set, grid, 0, 1);
  REQUIRE(egrid.values.rows() == 3);
  REQUIRE(egrid.values.cols() == 1);
  for (int n = 0; n < 3; ++n)
    CHECK(egrid.values(n, 0) ==
          doctest::Approx(eval.perturbed_error(3.0, set.ops[0], grid.delta(n))).epsilon(1e-14));
}

TEST_CASE("uniform bias shift leaves the error invariant") {
  Rng rng(67);
  SpinNetwork net{5, Topology::Chain, 1.0, 0.0};
  VectorXd biases(5);
  for (int i = 0; i < 5; ++i) biases(i) = rng.uniform(-5.0, 5.0);
  HamiltonianSS h1 = build_hamiltonian(net, {biases, 1.0, 1, 3, -1.0});
  HamiltonianSS h2 =
      build_hamiltonian(net, {(biases.array() + 2.7).matrix(), 1.0, 1, 3, -1.0});
  ErrorEvaluator e1(h1, 1, 3), e2(h2, 1, 3);
  for (double t : {0.5, 2.0, 8.0})
    CHECK(e1.nominal_error(t) == doctest::Approx(e2.nominal_error(t)).epsilon(1e-12));
}

}  // TEST_SUITE
