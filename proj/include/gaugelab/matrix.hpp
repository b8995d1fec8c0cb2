#pragma once

// Dense complex matrices and the matrix norms used throughout.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "gaugelab/space.hpp"

namespace gaugelab {

using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard matrix unit e_{ij} (zero-based indices).
inline DenseMatrix unit_matrix(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  DenseMatrix e = DenseMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline DenseMatrix diag(std::initializer_list<cplx> entries) {
  DenseMatrix d = DenseMatrix::Zero(static_cast<Eigen::Index>(entries.size()),
                                    static_cast<Eigen::Index>(entries.size()));
  Eigen::Index k = 0;
  for (const cplx& e : entries) {
    d(k, k) = e;
    ++k;
  }
  return d;
}

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

inline void require_finite(const DenseMatrix& m, const char* what) {
  if (!all_finite(m)) throw std::domain_error(std::string(what) + ": non-finite entry");
}

inline void require_same_shape(const DenseMatrix& t, const DenseMatrix& s) {
  if (t.rows() != t.cols() || s.rows() != s.cols() || t.rows() != s.rows())
    throw std::invalid_argument("dimension mismatch: expected two square matrices of equal size");
}

inline Eigen::VectorXd singular_values(const DenseMatrix& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<DenseMatrix>(m).singularValues();
}

// Operator norm on l_2. Computed from the top eigenvalue of M*M, which is
// much cheaper than a full SVD for the small matrices swept on grids.
inline double opnorm(const DenseMatrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  const DenseMatrix gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// Schatten-p norm; p = infinity gives the operator norm.
inline double schatten_norm(const DenseMatrix& m, double p) {
  if (!(p >= 1.0)) throw std::domain_error("schatten_norm: p must lie in [1, inf]");
  const Eigen::VectorXd s = singular_values(m);
  if (s.size() == 0) return 0.0;
  const double top = s.maxCoeff();
  if (std::isinf(p)) return top;
  if (top == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += std::pow(s(i) / top, p);
  return top * std::pow(acc, 1.0 / p);
}

inline bool is_hermitian(const DenseMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, m.cwiseAbs().maxCoeff());
}

// Smallest eigenvalue of the Hermitian part.
inline double min_eigenvalue(const DenseMatrix& m) {
  const DenseMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Eigenvalues >= -tol are accepted; optimizer iterates sit on the cone boundary.
inline bool is_psd(const DenseMatrix& m, double tol = 1e-10) {
  return is_hermitian(m, 1e-10) && min_eigenvalue(m) >= -tol;
}

// Hilbert-Schmidt pairing Re tr(A B^*).
inline double hs_inner(const DenseMatrix& a, const DenseMatrix& b) {
  return (a.array() * b.array().conjugate()).sum().real();
}

// A -> A^+ : same diagonal, off-diagonal replaced by its modulus.
inline DenseMatrix a_plus(const DenseMatrix& a) {
  if (a.rows() != 2 || a.cols() != 2) throw std::invalid_argument("a_plus: expected a 2x2 matrix");
  if (!is_hermitian(a, 1e-10)) throw std::invalid_argument("a_plus: matrix is not Hermitian");
  DenseMatrix out(2, 2);
  const double off = std::abs(a(0, 1));
  out << a(0, 0).real(), off, off, a(1, 1).real();
  return out;
}

// Haar-distributed unitary via QR of a complex Gaussian matrix.
template <typename Rng>
DenseMatrix random_unitary(Eigen::Index n, Rng& rng) {
  std::normal_distribution<double> normal;
  DenseMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = cplx(normal(rng), normal(rng));
  Eigen::HouseholderQR<DenseMatrix> qr(g);
  DenseMatrix q = qr.householderQ();
  const DenseMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

template <typename Rng>
DenseMatrix random_gaussian(Eigen::Index n, Rng& rng, Field field = Field::Complex) {
  std::normal_distribution<double> normal;
  DenseMatrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      g(i, j) = field == Field::Real ? cplx(normal(rng), 0.0) : cplx(normal(rng), normal(rng));
  return g;
}

}  // namespace gaugelab
