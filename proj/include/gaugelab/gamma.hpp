#pragma once

// The Property P constant
//   gamma(X) = sup { <A, B> : A, B >= 0, ||A||_{X -> X*} <= 1, ||B||_{X* -> X} <= 1 }
// for two-dimensional X, estimated from below by a seeded multi-start
// coordinate ascent over real pairs with nonnegative off-diagonal entries.
// Also: the complex -> real transfer of witnesses, extreme points of the
// real unit ball, and the 2x2 block Parrot homomorphism.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "gaugelab/gauge.hpp"
#include "gaugelab/matrix.hpp"
#include "gaugelab/norms.hpp"
#include "gaugelab/numeric.hpp"

namespace gaugelab {

struct GammaWitness {
  DenseMatrix a;
  DenseMatrix b;
  double value = 0.0;  // Re tr(A B^*)
  double norm_a = 0.0;
  double norm_b = 0.0;
};

struct GammaBudget {
  int starts = 64;
  int iterations = 500;
  std::uint64_t seed = kDefaultSeed;
};

inline constexpr double kPropertyPMargin = 1e-3;

namespace detail {

inline void require_real_entries(const DenseMatrix& m, const char* what) {
  if (m.imag().cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument(std::string(what) + ": real space needs real matrices");
}

inline DenseMatrix real_psd(double d1, double off, double d2) {
  DenseMatrix m(2, 2);
  m << d1, off, off, d2;
  return m;
}

}  // namespace detail

// Rescales A and B so that both constraints are active. Any value returned
// is a certified lower bound for gamma(X).
inline GammaWitness gamma_lower_bound(const SpaceDescriptor& x, const DenseMatrix& a, const DenseMatrix& b,
                                      const QuadraticNorms& norms) {
  if (x.is_real()) {
    detail::require_real_entries(a, "gamma_lower_bound");
    detail::require_real_entries(b, "gamma_lower_bound");
  }
  const double na = norms.x_to_dual(a);
  const double nb = norms.dual_to_x(b);
  if (na == 0.0 || nb == 0.0) throw std::invalid_argument("gamma_lower_bound: A and B must be nonzero");
  GammaWitness w;
  w.a = a / na;
  w.b = b / nb;
  w.norm_a = norms.x_to_dual(w.a);
  w.norm_b = norms.dual_to_x(w.b);
  w.value = hs_inner(w.a, w.b);
  return w;
}

inline GammaWitness gamma_lower_bound(const SpaceDescriptor& x, const DenseMatrix& a, const DenseMatrix& b) {
  return gamma_lower_bound(x, a, b, QuadraticNorms(x));
}

// Chart for one matrix: (d1, d2, rho) in [0, 1]^3 -> [[d1, r], [r, d2]] with
// r = rho sqrt(d1 d2). Every point is PSD with nonnegative off-diagonal.
struct GammaPoint {
  std::array<double, 6> u{};

  double a11() const { return u[0]; }
  double a22() const { return u[1]; }
  double a12() const { return u[2] * std::sqrt(u[0] * u[1]); }
  double b11() const { return u[3]; }
  double b22() const { return u[4]; }
  double b12() const { return u[5] * std::sqrt(u[3] * u[4]); }
};

// gamma_estimate with a prebuilt norm oracle; see below.
inline GammaWitness gamma_estimate(const QuadraticNorms& norms, const GammaBudget& budget) {
  if (budget.starts <= 0 || budget.iterations <= 0)
    throw std::invalid_argument("gamma_estimate: budget must be positive");

  auto norm_a = [&](const GammaPoint& g) { return norms.x_to_dual(g.a11(), g.a12(), g.a22()); };
  auto norm_b = [&](const GammaPoint& g) { return norms.dual_to_x(g.b11(), g.b12(), g.b22()); };
  auto value = [](const GammaPoint& g, double na, double nb) {
    if (na <= 0.0 || nb <= 0.0) return -1.0;
    return (g.a11() * g.b11() + g.a22() * g.b22() + 2.0 * g.a12() * g.b12()) / (na * nb);
  };

  GammaPoint best_point;
  double best = -1.0;
  for (int start = 0; start < budget.starts; ++start) {
    GammaPoint g;
    if (start == 0) {
      g.u = {1, 1, 0, 1, 1, 0};  // (I, I)
    } else if (start == 1) {
      g.u = {1, 0, 0, 1, 0, 0};  // (e11, e11), value 1 on every space
    } else {
      std::mt19937_64 rng(mix_seed(budget.seed, static_cast<std::uint64_t>(start)));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      for (double& c : g.u) c = unit(rng);
    }
    double na = norm_a(g);
    double nb = norm_b(g);
    double cur = value(g, na, nb);
    double step = 0.25;
    for (int it = 0; it < budget.iterations && step > 1e-9; ++it) {
      bool improved = false;
      for (int c = 0; c < 6; ++c) {
        for (double dir : {1.0, -1.0}) {
          GammaPoint trial = g;
          trial.u[c] = std::clamp(g.u[c] + dir * step, 0.0, 1.0);
          if (trial.u[c] == g.u[c]) continue;
          const double ta = c < 3 ? norm_a(trial) : na;
          const double tb = c < 3 ? nb : norm_b(trial);
          const double tv = value(trial, ta, tb);
          if (tv > cur) {
            g = trial;
            na = ta;
            nb = tb;
            cur = tv;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (cur > best) {
      best = cur;
      best_point = g;
    }
  }
  const GammaPoint& g = best_point;
  return gamma_lower_bound(norms.space(), detail::real_psd(g.a11(), g.a12(), g.a22()),
                           detail::real_psd(g.b11(), g.b12(), g.b22()), norms);
}

// Lower estimate of gamma(X). Starts 0 and 1 are (I, I) and (e11, e11); the
// rest are seeded from (seed, start index), so a larger budget with the same
// seed explores a superset and never returns a smaller value.
inline GammaWitness gamma_estimate(const SpaceDescriptor& x, const GammaBudget& budget = {}) {
  return gamma_estimate(QuadraticNorms(x), budget);
}

struct PropertyPVerdict {
  enum class Kind { Fails, NotRefuted };
  Kind kind = Kind::NotRefuted;
  GammaWitness witness;
};

// Fails iff the estimate exceeds 1 + margin; the witness then proves it.
// Never claims that Property P holds.
inline PropertyPVerdict property_p_verdict(const SpaceDescriptor& x, const GammaBudget& budget = {},
                                           double margin = kPropertyPMargin) {
  if (!(margin > 0.0)) throw std::invalid_argument("property_p_verdict: margin must be positive");
  PropertyPVerdict v;
  v.witness = gamma_estimate(x, budget);
  v.kind = v.witness.value > 1.0 + margin ? PropertyPVerdict::Kind::Fails : PropertyPVerdict::Kind::NotRefuted;
  return v;
}

// alpha(X) >= sqrt(gamma(X)).
inline double alpha_lower_bound(const SpaceDescriptor& x, const GammaBudget& budget = {}) {
  return std::sqrt(std::max(0.0, gamma_estimate(x, budget).value));
}

// Reads a witness for the real shadow as a witness for the complex space.
// For real A with a12 >= 0 the quadratic form over C^2 peaks at nonnegative
// moduli, so both norms and the value carry over unchanged.
inline GammaWitness transfer_lift(const SpaceDescriptor& x, const GammaWitness& w) {
  if (x.is_real()) throw std::invalid_argument("transfer_lift: target space must be complex");
  for (const DenseMatrix* m : {&w.a, &w.b}) {
    if (m->rows() != 2 || m->cols() != 2) throw std::invalid_argument("transfer_lift: expected 2x2 matrices");
    detail::require_real_entries(*m, "transfer_lift");
    if ((*m)(0, 1).real() < 0.0 || (*m)(1, 0).real() < 0.0)
      throw std::invalid_argument("transfer_lift: negative off-diagonal entry; apply a_plus first");
  }
  const QuadraticNorms norms(x);
  GammaWitness out;
  out.a = w.a;
  out.b = w.b;
  out.norm_a = norms.x_to_dual(out.a);
  out.norm_b = norms.dual_to_x(out.b);
  out.value = hs_inner(out.a, out.b);
  return out;
}

// The dual space as a descriptor: conjugate exponent for Lp, l_1 <-> l_inf,
// the polar polygon for tables, and for Bpq a polygon through 1024 points of
// the dual sphere.
inline SpaceDescriptor dual_space(const SpaceDescriptor& x) {
  if (x.is_linf()) return SpaceDescriptor::lp(1.0, x.field());
  if (x.is_lp()) {
    const double p = x.exponents()[0];
    if (p == 1.0) return SpaceDescriptor::linf(x.field());
    return SpaceDescriptor::lp(p / (p - 1.0), x.field());
  }
  const SphereArc arc(x, Side::Dual, 1024);
  return SpaceDescriptor::table(x.is_table() ? arc.vertices() : arc.nodes(), x.field());
}

// Extreme points of the real unit ball. On polygonal spheres v is extreme
// iff two distinct supporting lines pass through it. Smooth spheres use the
// perturbation test min_d max(g(v + eps d), g(v - eps d)) > 1 + tol over a
// ladder of eps; the large rungs catch very flat spots of l_p, p >> 2.
inline bool extreme_point_test(const SpaceDescriptor& x, const Point2& v, double tol = 1e-10) {
  const double g = gauge_moduli(std::abs(v.x), std::abs(v.y), x);
  if (std::abs(g - 1.0) > 1e-9) throw std::invalid_argument("extreme_point_test: v is not on the unit sphere");
  const double ax = std::abs(v.x);
  const double ay = std::abs(v.y);
  if (x.is_polygonal()) {
    const SphereArc dual(x, Side::Dual, 2);
    std::vector<Point2> active;
    for (const Point2& w : dual.vertices()) {
      for (double sy : {1.0, -1.0}) {
        for (double sx : {1.0, -1.0}) {
          const Point2 n{sx * w.x, sy * w.y};
          if (n.x * ax + n.y * ay < 1.0 - 1e-12) continue;
          bool seen = false;
          for (const Point2& a : active) seen = seen || (std::abs(a.x - n.x) + std::abs(a.y - n.y) < 1e-12);
          if (!seen) active.push_back(n);
        }
      }
    }
    return active.size() >= 2;
  }
  auto spread = [&](double eps, double th) {
    const double dx = eps * std::cos(th);
    const double dy = eps * std::sin(th);
    return std::max(gauge_moduli(std::abs(v.x + dx), std::abs(v.y + dy), x),
                    gauge_moduli(std::abs(v.x - dx), std::abs(v.y - dy), x));
  };
  constexpr int kDirections = 180;
  for (double eps : {0.5, 0.1, 1e-2, 1e-3}) {
    int arg = 0;
    double low = INFINITY;
    for (int j = 0; j < kDirections; ++j) {
      const double val = spread(eps, std::numbers::pi * j / kDirections);
      if (val < low) {
        low = val;
        arg = j;
      }
    }
    const double h = std::numbers::pi / kDirections;
    low = std::min(low, golden_section_min([&](double th) { return spread(eps, th); }, h * (arg - 1),
                                           h * (arg + 1), 1e-12)
                            .second);
    if (low > 1.0 + tol) return true;
  }
  return false;
}

// Number of extreme points of the real unit ball. Exact for polygons; for
// smooth spheres it counts extreme points among `samples` boundary points,
// so it is a lower bound.
inline int count_extreme_points(const SpaceDescriptor& x, int samples = 64) {
  std::vector<Point2> candidates;
  if (x.is_polygonal()) {
    const SphereArc primal(x, Side::Primal, 2);
    for (const Point2& p : primal.vertices())
      for (double sx : {1.0, -1.0})
        for (double sy : {1.0, -1.0}) candidates.push_back({sx * p.x, sy * p.y});
  } else {
    for (int k = 0; k < samples; ++k) {
      const double th = 2.0 * std::numbers::pi * k / samples;
      const double c = std::cos(th);
      const double s = std::sin(th);
      const double g = gauge_moduli(std::abs(c), std::abs(s), x);
      candidates.push_back({c / g, s / g});
    }
  }
  std::vector<Point2> distinct;
  for (const Point2& p : candidates) {
    bool seen = false;
    for (const Point2& q : distinct) seen = seen || (std::abs(p.x - q.x) + std::abs(p.y - q.y) < 1e-12);
    if (!seen) distinct.push_back(p);
  }
  int count = 0;
  for (const Point2& p : distinct) count += extreme_point_test(x, p);
  return count;
}

// Bivariate polynomial sum_{i,j} c[i][j] z1^i z2^j.
class Polynomial {
 public:
  explicit Polynomial(std::vector<std::vector<cplx>> coeffs) : c_(std::move(coeffs)) {
    if (c_.empty()) throw std::invalid_argument("polynomial: empty coefficient table");
    const std::size_t width = c_.front().size();
    if (width == 0) throw std::invalid_argument("polynomial: empty coefficient row");
    for (const auto& row : c_) {
      if (row.size() != width) throw std::invalid_argument("polynomial: ragged coefficient table");
      for (const cplx& v : row)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
          throw std::invalid_argument("polynomial: non-finite coefficient");
    }
  }

  static Polynomial constant(cplx v) { return Polynomial({{v}}); }

  std::size_t rows() const { return c_.size(); }
  std::size_t cols() const { return c_.front().size(); }
  const cplx& coeff(std::size_t i, std::size_t j) const { return c_[i][j]; }

  cplx operator()(const Vec2& w) const { return eval(w, 0, 0); }
  cplx d1(const Vec2& w) const { return eval(w, 1, 0); }
  cplx d2(const Vec2& w) const { return eval(w, 0, 1); }

  friend Polynomial operator*(const Polynomial& f, const Polynomial& g) {
    std::vector<std::vector<cplx>> out(f.rows() + g.rows() - 1, std::vector<cplx>(f.cols() + g.cols() - 1));
    for (std::size_t i = 0; i < f.rows(); ++i)
      for (std::size_t j = 0; j < f.cols(); ++j)
        for (std::size_t k = 0; k < g.rows(); ++k)
          for (std::size_t l = 0; l < g.cols(); ++l) out[i + k][j + l] += f.c_[i][j] * g.c_[k][l];
    return Polynomial(std::move(out));
  }

 private:
  // Integer power with 0^0 = 1 (std::pow on complex goes through log).
  static cplx ipow(cplx z, std::size_t k) {
    cplx r = 1.0;
    for (std::size_t i = 0; i < k; ++i) r *= z;
    return r;
  }

  // Value of the (di, dj)-th partial derivative, di + dj <= 1.
  cplx eval(const Vec2& w, std::size_t di, std::size_t dj) const {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i) {
      for (std::size_t j = 0; j < c_[i].size(); ++j) {
        if (i < di || j < dj) continue;
        const double factor = (di ? static_cast<double>(i) : 1.0) * (dj ? static_cast<double>(j) : 1.0);
        acc += factor * c_[i][j] * ipow(w.z1, i - di) * ipow(w.z2, j - dj);
      }
    }
    return acc;
  }

  std::vector<std::vector<cplx>> c_;
};

// [[f(w) I, d1f(w) T1 + d2f(w) T2], [0, f(w) I]].
inline DenseMatrix parrot_block(const Polynomial& f, const Vec2& w, const DenseMatrix& t1, const DenseMatrix& t2) {
  require_same_shape(t1, t2);
  const Eigen::Index n = t1.rows();
  if (n < 1) throw std::invalid_argument("parrot_block: n must be at least 1");
  const cplx fw = f(w);
  DenseMatrix out = DenseMatrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = fw * DenseMatrix::Identity(n, n);
  out.bottomRightCorner(n, n) = fw * DenseMatrix::Identity(n, n);
  out.topRightCorner(n, n) = f.d1(w) * t1 + f.d2(w) * t2;
  return out;
}

}  // namespace gaugelab
