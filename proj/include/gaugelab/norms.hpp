#pragma once

// Norms of 2x2 positive semidefinite matrices as maps X -> X* and X* -> X,
// and the operator norm of the image of a candidate pair map.

#include <stdexcept>

#include "gaugelab/gauge.hpp"
#include "gaugelab/matrix.hpp"

namespace gaugelab {

inline constexpr double kPsdTolerance = 1e-10;

namespace detail {

inline DenseMatrix checked_psd_plus(const DenseMatrix& a) {
  if (a.rows() != 2 || a.cols() != 2) throw std::invalid_argument("expected a 2x2 matrix");
  gaugelab::require_finite(a, "psd matrix");
  if (!is_hermitian(a, 1e-10)) throw std::invalid_argument("precondition: matrix is not Hermitian");
  if (min_eigenvalue(a) < -kPsdTolerance) throw std::invalid_argument("precondition: matrix is not PSD");
  return a_plus(a);
}

}  // namespace detail

// Both quadrant arcs of a space, built once and reused for many norm
// evaluations.
class QuadraticNorms {
 public:
  explicit QuadraticNorms(const SpaceDescriptor& space, int nodes = SphereArc::kDefaultNodes)
      : space_(space), primal_(space, Side::Primal, nodes), dual_(space, Side::Dual, nodes) {}

  const SpaceDescriptor& space() const { return space_; }

  // ||A||_{X -> X*} = sup over the unit ball of z^* A z. Evaluated on A^+ over
  // the nonnegative quadrant arc; negative eigenvalues down to -1e-10 are
  // treated as zero.
  double x_to_dual(const DenseMatrix& a) const {
    const DenseMatrix p = detail::checked_psd_plus(a);
    return std::max(0.0, primal_.max_quadratic(p(0, 0).real(), p(0, 1).real(), p(1, 1).real()));
  }

  // ||B||_{X* -> X}, the same supremum over the dual ball.
  double dual_to_x(const DenseMatrix& b) const {
    const DenseMatrix p = detail::checked_psd_plus(b);
    return std::max(0.0, dual_.max_quadratic(p(0, 0).real(), p(0, 1).real(), p(1, 1).real()));
  }

  // Fast paths for real parameters (a11, a12 >= 0, a22) already in A^+ form.
  double x_to_dual(double a11, double a12, double a22) const {
    return std::max(0.0, primal_.max_quadratic(a11, a12, a22));
  }
  double dual_to_x(double b11, double b12, double b22) const {
    return std::max(0.0, dual_.max_quadratic(b11, b12, b22));
  }

  const SphereArc& primal_arc() const { return primal_; }
  const SphereArc& dual_arc() const { return dual_; }

 private:
  SpaceDescriptor space_;
  SphereArc primal_;
  SphereArc dual_;
};

inline double opnorm_psd_X_to_Xdual(const DenseMatrix& a, const SpaceDescriptor& space) {
  return QuadraticNorms(space).x_to_dual(a);
}

inline double opnorm_psd_Xdual_to_X(const DenseMatrix& b, const SpaceDescriptor& space) {
  return QuadraticNorms(space).dual_to_x(b);
}

// sigma_max(z1 T + z2 S).
inline double xnorm_of_pair_map(const Vec2& z, const DenseMatrix& t, const DenseMatrix& s) {
  require_same_shape(t, s);
  return opnorm(z.z1 * t + z.z2 * s);
}

}  // namespace gaugelab
