#pragma once

// Birkhoff-James orthogonality and norm parallelism of matrices.
//
// Each relation is decided along two independent routes: a definitional one
// that scans ||T + z S|| over scalars z, and a witness route that searches
// the norm-attaining set M_T for a vector zeta with the required value of
// <T zeta, S zeta>. Inner products are linear in the first slot:
// <x, y> = y^* x.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugelab/matrix.hpp"
#include "gaugelab/numeric.hpp"

namespace gaugelab {

inline constexpr double kMSetTolerance = 1e-9;

struct OrthVerdict {
  bool holds = false;
  // False when the witness search neither found a witness nor separated 0
  // from the numerical range; `holds` is then false but not a refutation.
  bool conclusive = true;
  std::optional<DenseVector> witness;
  std::optional<cplx> minimizing_scalar;
  double residual = 0.0;
  std::string note;
};

struct ParallelVerdict {
  bool holds = false;
  std::optional<DenseVector> witness;
  std::optional<cplx> phase;
  // max over |z| = 1 of ||T + z S|| (phase scan) or of |<T zeta, S zeta>|
  // over M_T (witness route).
  double attained = 0.0;
};

// Norm used by the scalar scans: operator norm (p = inf) or Schatten-p.
inline double matrix_norm(const DenseMatrix& m, double p) {
  return std::isinf(p) ? opnorm(m) : schatten_norm(m, p);
}

// Orthonormal basis (columns) of the right singular subspace for singular
// values >= sigma_max (1 - tol). Its unit sphere is M_T after scaling T to
// norm one.
inline DenseMatrix m_set_basis(const DenseMatrix& t, double tol = kMSetTolerance) {
  require_finite(t, "m_set_basis");
  if (t.rows() == 0 || t.cwiseAbs().maxCoeff() == 0.0) throw std::invalid_argument("m_set_basis: T = 0");
  Eigen::JacobiSVD<DenseMatrix> svd(t, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  Eigen::Index k = 0;
  while (k < s.size() && s(k) >= s(0) * (1.0 - tol)) ++k;
  return svd.matrixV().leftCols(k);
}

namespace detail {

// Top eigenpair of the Hermitian part of e^{i theta} M.
struct Support {
  double value;
  DenseVector vector;
};

inline Support support(const DenseMatrix& m, double theta) {
  const cplx rot = std::polar(1.0, theta);
  const DenseMatrix h = 0.5 * (rot * m + std::conj(rot) * m.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
  const Eigen::Index top = h.rows() - 1;
  return {es.eigenvalues()(top), es.eigenvectors().col(top)};
}

inline cplx rayleigh(const DenseMatrix& m, const DenseVector& x) { return x.dot(m * x); }

// Given unit x, y with values a = x^*Mx, b = y^*My, returns the unit vectors
// in span{x, y} of the form x + t e^{i phi} y whose value has zero imaginary
// part (requires Im a <= 0 <= Im b). Up to two candidates.
inline std::vector<DenseVector> real_axis_points(const DenseMatrix& m, const DenseVector& x, cplx a,
                                                 const DenseVector& y, cplx b) {
  std::vector<DenseVector> out;
  if (a.imag() > 0.0 || b.imag() < 0.0) return out;
  if (a.imag() == 0.0) {
    out.push_back(x);
    return out;
  }
  if (b.imag() == 0.0) {
    out.push_back(y);
    return out;
  }
  const cplx alpha = x.dot(m * y);  // x^* M y
  const cplx beta = y.dot(m * x);   // y^* M x
  const cplx d = alpha - std::conj(beta);
  const double phi = d == cplx(0.0) ? 0.0 : -std::arg(d);
  const double t = std::sqrt(-a.imag() / b.imag());
  for (double shift : {0.0, std::numbers::pi}) {
    DenseVector v = x + t * std::polar(1.0, phi + shift) * y;
    const double nv = v.norm();
    if (nv < 1e-8) continue;
    out.push_back(v / nv);
  }
  return out;
}

// Zero of the value on span{x, y} when x^*Mx = r1 <= 0 <= r2 = y^*My (both
// real). Solves r2 t^2 + c t + r1 = 0 with the cross term made real.
inline std::optional<DenseVector> combine_to_zero(const DenseMatrix& m, const DenseVector& x, double r1,
                                                  const DenseVector& y, double r2) {
  if (r1 == 0.0) return x;
  if (r2 == 0.0) return y;
  const cplx alpha = x.dot(m * y);
  const cplx beta = y.dot(m * x);
  const cplx d = alpha - std::conj(beta);
  const double phi = d == cplx(0.0) ? 0.0 : -std::arg(d);
  const cplx e = std::polar(1.0, phi);
  const double c = (e * alpha + std::conj(e) * beta).real();
  const double disc = c * c - 4.0 * r2 * r1;
  if (disc < 0.0) return std::nullopt;
  const double t = (-c + std::sqrt(disc)) / (2.0 * r2);
  DenseVector v = x + t * e * y;
  const double nv = v.norm();
  if (nv < 1e-8) return std::nullopt;
  return DenseVector(v / nv);
}

// Projected gradient descent on |c^* M c|^2 over the unit sphere.
template <typename Rng>
DenseVector minimize_modulus(const DenseMatrix& m, DenseVector c, Rng& rng, int iters = 300) {
  (void)rng;
  double step = 0.5;
  for (int it = 0; it < iters; ++it) {
    const cplx v = rayleigh(m, c);
    const double g0 = std::norm(v);
    if (g0 < 1e-32) break;
    DenseVector grad = std::conj(v) * (m * c) + v * (m.adjoint() * c);
    grad -= c.dot(grad) * c;
    const double gn = grad.norm();
    if (gn < 1e-18) break;
    bool improved = false;
    for (int ls = 0; ls < 40; ++ls) {
      DenseVector trial = c - step * grad;
      trial.normalize();
      if (std::norm(rayleigh(m, trial)) < g0) {
        c = trial;
        step *= 1.5;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return c;
}

struct RangeZero {
  std::optional<DenseVector> vector;  // unit c with |c^* M c| = residual
  double residual = INFINITY;
  double separation = 0.0;  // > 0 certifies dist(0, W(M)) >= separation
  bool conclusive = true;
};

// Searches the numerical range W(M) for 0.
//   separation s = -min_theta lambda_max(Re(e^{i theta} M)) = dist(0, W(M))
//   when positive. If s >= 0 the support vector at the minimizing angle is
//   the nearest point of W(M). Otherwise 0 is interior and a zero is built
//   from support vectors on both sides of the real axis.
inline RangeZero numerical_range_zero(const DenseMatrix& m, double tol, std::uint64_t seed) {
  RangeZero out;
  const Eigen::Index k = m.rows();
  if (k == 1) {
    DenseVector e = DenseVector::Zero(1);
    e(0) = 1.0;
    out.vector = e;
    out.residual = std::abs(m(0, 0));
    out.separation = out.residual;
    return out;
  }
  constexpr int kAngles = 128;
  std::vector<Support> sup;
  sup.reserve(kAngles);
  int arg = 0;
  for (int j = 0; j < kAngles; ++j) {
    sup.push_back(support(m, 2.0 * std::numbers::pi * j / kAngles));
    if (sup[j].value < sup[arg].value) arg = j;
  }
  const double h = 2.0 * std::numbers::pi / kAngles;
  const auto [theta, lam] = golden_section_min([&](double th) { return support(m, th).value; },
                                               h * arg - h, h * arg + h, 1e-12);
  out.separation = -std::min(lam, sup[arg].value);
  if (out.separation >= 0.0) {
    const Support s = support(m, lam <= sup[arg].value ? theta : h * arg);
    out.vector = s.vector;
    out.residual = std::abs(rayleigh(m, s.vector));
    return out;
  }

  auto consider = [&](const DenseVector& c) {
    const double r = std::abs(rayleigh(m, c));
    if (r < out.residual) {
      out.residual = r;
      out.vector = c;
    }
  };

  std::vector<std::pair<DenseVector, cplx>> below;
  std::vector<std::pair<DenseVector, cplx>> above;
  for (const Support& s : sup) {
    const cplx w = rayleigh(m, s.vector);
    consider(s.vector);
    if (w.imag() <= 0.0) below.emplace_back(s.vector, w);
    if (w.imag() >= 0.0) above.emplace_back(s.vector, w);
  }
  // Real-axis points of W(M); keep the most negative and most positive.
  std::optional<std::pair<DenseVector, double>> left;
  std::optional<std::pair<DenseVector, double>> right;
  for (const auto& [x, a] : below) {
    for (const auto& [y, b] : above) {
      for (const DenseVector& v : real_axis_points(m, x, a, y, b)) {
        const double r = rayleigh(m, v).real();
        if (!left || r < left->second) left = std::pair{v, r};
        if (!right || r > right->second) right = std::pair{v, r};
      }
    }
  }
  if (left && right && left->second <= 0.0 && right->second >= 0.0) {
    if (auto z = combine_to_zero(m, left->first, left->second, right->first, right->second)) consider(*z);
  }
  if (out.residual > tol) {
    // Fallback: seeded multi-start descent on |c^* M c|.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    const int starts = k > 4 ? 10000 : 16;
    DenseVector best_start;
    double best_val = INFINITY;
    for (int i = 0; i < starts; ++i) {
      DenseVector c(k);
      for (Eigen::Index r = 0; r < k; ++r) c(r) = cplx(n(rng), n(rng));
      c.normalize();
      if (k > 4) {
        const double v = std::abs(rayleigh(m, c));
        if (v < best_val) {
          best_val = v;
          best_start = c;
        }
      } else {
        consider(minimize_modulus(m, c, rng));
      }
    }
    if (k > 4) consider(minimize_modulus(m, best_start, rng, 2000));
    out.conclusive = out.residual <= tol;
  }
  return out;
}

}  // namespace detail

// Definitional check: T _|_BJ S iff min_z ||T + z S|| >= ||T|| - tol.
// z ranges over the disc |z| <= 2||T|| / ||S|| (outside it the norm exceeds
// ||T||); a 64 x 64 polar grid locates the basin and, since the objective is
// convex in z, nested golden-section search finds the minimum.
inline OrthVerdict bj_orthogonal_definitional(const DenseMatrix& t, const DenseMatrix& s, double tol,
                                              double schatten_p = kInf) {
  require_same_shape(t, s);
  require_finite(t, "bj");
  require_finite(s, "bj");
  auto f = [&](double re, double im) { return matrix_norm(t + cplx(re, im) * s, schatten_p); };
  const double nt = matrix_norm(t, schatten_p);
  const double ns = matrix_norm(s, schatten_p);
  OrthVerdict out;
  if (ns == 0.0) {
    out.holds = true;
    out.minimizing_scalar = cplx(0.0);
    return out;
  }
  const double radius = 2.0 * nt / std::max(ns, 1e-300);
  constexpr int kGrid = 64;
  double best = nt;
  cplx best_z = 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const cplx z = std::polar(radius * i / kGrid, 2.0 * std::numbers::pi * j / kGrid);
      const double v = f(z.real(), z.imag());
      if (v < best) {
        best = v;
        best_z = z;
      }
    }
  }
  if (radius > 0.0) {
    // Partial minimization of a convex function stays convex, so the outer
    // search is unimodal as well.
    const double rtol = 1e-12 * radius;
    double inner_arg = 0.0;
    auto inner = [&](double re) {
      const auto r = golden_section_min([&](double im) { return f(re, im); }, -radius, radius, rtol);
      inner_arg = r.first;
      return r.second;
    };
    const auto [re, val] = golden_section_min(inner, -radius, radius, rtol);
    inner(re);
    if (val < best) {
      best = val;
      best_z = cplx(re, inner_arg);
    }
  }
  out.minimizing_scalar = best_z;
  out.residual = std::max(0.0, nt - best);
  out.holds = best >= nt - tol;
  return out;
}

// Witness route: T _|_BJ S iff some zeta in M_T has <T zeta, S zeta> = 0,
// i.e. iff 0 lies in the numerical range of Q^* S^* T Q for an orthonormal
// basis Q of the norm-attaining subspace.
inline OrthVerdict bj_witness_search(const DenseMatrix& t, const DenseMatrix& s, double tol,
                                     std::uint64_t seed = kDefaultSeed) {
  require_same_shape(t, s);
  const DenseMatrix q = m_set_basis(t);
  const DenseMatrix m = q.adjoint() * s.adjoint() * t * q;
  const detail::RangeZero z = detail::numerical_range_zero(m, tol, seed);
  OrthVerdict out;
  out.residual = z.residual;
  if (z.vector) out.witness = DenseVector(q * *z.vector);
  if (z.residual <= tol) {
    out.holds = true;
  } else if (z.separation > tol) {
    out.holds = false;
    out.note = "0 separated from the numerical range";
  } else {
    out.holds = false;
    out.conclusive = z.conclusive;
    if (!z.conclusive) out.note = "witness not found";
  }
  return out;
}

// Phase-scan route: T || S iff max_{|z|=1} ||T + z S|| >= ||T|| + ||S|| - tol.
// 4096-node phase grid, golden-section refinement around the best node. When
// the relation holds, the top right singular vector of T + z S lies in
// M_T and M_S and attains |<T zeta, S zeta>| = ||T|| ||S||.
inline ParallelVerdict norm_parallel(const DenseMatrix& t, const DenseMatrix& s, double tol,
                                     double schatten_p = kInf) {
  require_same_shape(t, s);
  const double nt = matrix_norm(t, schatten_p);
  const double ns = matrix_norm(s, schatten_p);
  if (nt == 0.0 || ns == 0.0) throw std::invalid_argument("norm_parallel: zero matrix");
  auto f = [&](double phi) { return matrix_norm(t + std::polar(1.0, phi) * s, schatten_p); };
  constexpr int kPhases = 4096;
  const double h = 2.0 * std::numbers::pi / kPhases;
  int arg = 0;
  double best = -1.0;
  for (int j = 0; j < kPhases; ++j) {
    const double v = f(h * j);
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  double phi = h * arg;
  const auto [rphi, rval] = golden_section_max(f, phi - h, phi + h, 1e-12);
  if (rval > best) {
    best = rval;
    phi = rphi;
  }
  ParallelVerdict out;
  out.attained = best;
  out.phase = std::polar(1.0, phi);
  out.holds = best >= nt + ns - tol;
  if (out.holds && std::isinf(schatten_p)) {
    Eigen::JacobiSVD<DenseMatrix> svd(t + *out.phase * s, Eigen::ComputeFullV);
    out.witness = DenseVector(svd.matrixV().col(0));
  }
  return out;
}

// Witness route for parallelism: the numerical radius of Q^* S^* T Q over
// the norm-attaining subspace of T must reach ||T|| ||S||.
inline ParallelVerdict parallel_witness_search(const DenseMatrix& t, const DenseMatrix& s, double tol) {
  require_same_shape(t, s);
  const double nt = opnorm(t);
  const double ns = opnorm(s);
  if (nt == 0.0 || ns == 0.0) throw std::invalid_argument("parallel_witness_search: zero matrix");
  const DenseMatrix q = m_set_basis(t);
  const DenseMatrix m = q.adjoint() * s.adjoint() * t * q;
  constexpr int kAngles = 256;
  const double h = 2.0 * std::numbers::pi / kAngles;
  int arg = 0;
  double best = -INFINITY;
  for (int j = 0; j < kAngles; ++j) {
    const double v = detail::support(m, h * j).value;
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  double theta = h * arg;
  const auto [rth, rval] =
      golden_section_max([&](double th) { return detail::support(m, th).value; }, theta - h, theta + h, 1e-12);
  if (rval > best) {
    best = rval;
    theta = rth;
  }
  const DenseVector c = detail::support(m, theta).vector;
  const DenseVector zeta = q * c;
  ParallelVerdict out;
  // <T zeta, S zeta> = c^* M c.
  const cplx inner = detail::rayleigh(m, c);
  out.attained = std::abs(inner);
  out.holds = out.attained >= nt * ns - tol;
  out.witness = zeta;
  // T zeta = z' S zeta direction: the maximizing phase of ||T + z S|| is
  // z = <T zeta, S zeta> / |<T zeta, S zeta>|.
  if (out.attained > 0.0) out.phase = inner / out.attained;
  return out;
}

struct SchattenParallelReport {
  double p = 2.0;
  double gap = 0.0;    // ||T||_p + ||S||_p - max_{|z|=1} ||T + z S||_p
  double score = 0.0;  // second singular value of the row-normalized [vec T; vec S]
  bool parallel = false;
  bool dependent = false;
  bool consistent = false;  // parallel == dependent
};

// In S_p with 1 < p < inf, parallelism is equivalent to linear dependence.
// Reports both sides so the equivalence can be checked on concrete pairs.
inline SchattenParallelReport sp_parallel_iff_dependent(const DenseMatrix& t, const DenseMatrix& s, double p,
                                                        double tol = 1e-9) {
  if (!(p > 1.0) || std::isinf(p)) throw std::domain_error("sp_parallel_iff_dependent: p must lie in (1, inf)");
  require_same_shape(t, s);
  SchattenParallelReport out;
  out.p = p;
  const ParallelVerdict scan = norm_parallel(t, s, tol, p);
  out.gap = std::max(0.0, schatten_norm(t, p) + schatten_norm(s, p) - scan.attained);
  const Eigen::Index n2 = t.size();
  DenseMatrix stack(2, n2);
  stack.row(0) = Eigen::Map<const DenseVector>(t.data(), n2).transpose() / t.norm();
  stack.row(1) = Eigen::Map<const DenseVector>(s.data(), n2).transpose() / s.norm();
  out.score = singular_values(stack)(1);
  out.parallel = out.gap <= tol;
  out.dependent = out.score <= tol;
  out.consistent = out.parallel == out.dependent;
  return out;
}

}  // namespace gaugelab
