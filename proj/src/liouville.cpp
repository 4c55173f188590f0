#include "spinsense/liouville.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "spinsense/common.hpp"

namespace spinsense {

using std::complex;
using namespace std::complex_literals;

HermitianBasis::HermitianBasis(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("basis dimension must be >= 2");
  mats_.reserve(static_cast<std::size_t>(n) * n);

  // Identity component first, then symmetric and antisymmetric off-diagonal
  // generators, then the diagonal traceless ladder. Tr(s_j s_k) = delta_jk.
  mats_.push_back(Eigen::MatrixXcd::Identity(n, n) / std::sqrt(static_cast<double>(n)));

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Eigen::MatrixXcd sym = Eigen::MatrixXcd::Zero(n, n);
      sym(j, k) = inv_sqrt2;
      sym(k, j) = inv_sqrt2;
      mats_.push_back(sym);

      Eigen::MatrixXcd asym = Eigen::MatrixXcd::Zero(n, n);
      asym(j, k) = -1i * inv_sqrt2;
      asym(k, j) = 1i * inv_sqrt2;
      mats_.push_back(asym);
    }
  }
  for (int l = 1; l < n; ++l) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int j = 0; j < l; ++j) d(j, j) = norm;
    d(l, l) = -static_cast<double>(l) * norm;
    mats_.push_back(d);
  }
}

namespace {

void check_dims(const HermitianBasis& basis, Eigen::Index rows) {
  if (rows != basis.dim()) throw std::invalid_argument("operator/basis dimension mismatch");
}

double real_checked(complex<double> z, const char* what) {
  if (std::abs(z.imag()) > 1e-12)
    throw NumericalIntegrityError(std::string(what) + ": non-real trace value");
  return z.real();
}

}  // namespace

Eigen::MatrixXd hamiltonian_superop(const Eigen::MatrixXd& h, const HermitianBasis& basis) {
  check_dims(basis, h.rows());
  const int m = basis.size();
  // Tr(iH [s_k, s_l]) = Tr(i (H s_k) s_l) - Tr(i s_k (H s_l)); precompute H s_k.
  std::vector<Eigen::MatrixXcd> hs(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) hs[k] = h * basis[k];

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    for (int l = k + 1; l < m; ++l) {
      complex<double> t = (hs[k] * basis[l]).trace() - (basis[k] * hs[l]).trace();
      double v = real_checked(1i * t, "hamiltonian_superop");
      a(k, l) = v;
      a(l, k) = -v;  // antisymmetric by construction
    }
  }
  return a;
}

Eigen::MatrixXd dephasing_superop(const Eigen::MatrixXcd& v, const HermitianBasis& basis) {
  check_dims(basis, v.rows());
  if (!v.isApprox(v.adjoint(), 1e-12)) throw std::invalid_argument("V must be Hermitian");

  const int m = basis.size();
  std::vector<Eigen::MatrixXcd> vs(static_cast<std::size_t>(m));
  std::vector<Eigen::MatrixXcd> ws(static_cast<std::size_t>(m));
  const Eigen::MatrixXcd v2 = v * v;
  for (int k = 0; k < m; ++k) {
    vs[k] = v * basis[k];
    ws[k] = v2 * basis[k];
  }

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(m, m);
  for (int k = 0; k < m; ++k) {
    for (int l = k; l < m; ++l) {
      // Tr(V s_k V s_l) - 1/2 Tr(V^2 (s_k s_l + s_l s_k))
      complex<double> t = (vs[k] * vs[l]).trace() -
                          0.5 * ((ws[k] * basis[l]).trace() + (ws[l] * basis[k]).trace());
      double val = real_checked(t, "dephasing_superop");
      s(k, l) = val;
      s(l, k) = val;
    }
  }
  return s;
}

Eigen::VectorXd vectorize(const Eigen::MatrixXcd& rho, const HermitianBasis& basis) {
  check_dims(basis, rho.rows());
  Eigen::VectorXd r(basis.size());
  for (int k = 0; k < basis.size(); ++k) {
    r(k) = real_checked((rho * basis[k]).trace(), "vectorize");
  }
  return r;
}

Eigen::MatrixXcd devectorize(const Eigen::VectorXd& r, const HermitianBasis& basis) {
  if (r.size() != basis.size()) throw std::invalid_argument("coefficient/basis size mismatch");
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(basis.dim(), basis.dim());
  for (int k = 0; k < basis.size(); ++k) rho += r(k) * basis[k];
  return rho;
}

LiouvilleSystem LiouvilleSystem::build(const HamiltonianSS& h, int input_spin, int output_spin) {
  const int n = h.dim();
  if (input_spin < 1 || input_spin > n || output_spin < 1 || output_spin > n)
    throw std::invalid_argument("spin index out of range");

  HermitianBasis basis(n);
  Eigen::MatrixXcd rho_in = Eigen::MatrixXcd::Zero(n, n);
  rho_in(input_spin - 1, input_spin - 1) = 1.0;
  Eigen::MatrixXcd rho_out = Eigen::MatrixXcd::Zero(n, n);
  rho_out(output_spin - 1, output_spin - 1) = 1.0;

  LiouvilleSystem sys{std::move(basis), {}, {}, {}};
  sys.A = hamiltonian_superop(h.matrix, sys.basis);
  sys.r0 = vectorize(rho_in, sys.basis);
  sys.c = vectorize(rho_out, sys.basis).transpose();
  return sys;
}

}  // namespace spinsense
