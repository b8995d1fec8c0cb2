#pragma once

// Minkowski functionals of the built-in spaces, their duals, and a sampled
// parametrization of the first-quadrant unit sphere used for 1-D suprema.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gaugelab/numeric.hpp"
#include "gaugelab/space.hpp"

namespace gaugelab {

namespace detail {

inline void require_finite(const Vec2& v) {
  if (!std::isfinite(v.z1.real()) || !std::isfinite(v.z1.imag()) || !std::isfinite(v.z2.real()) ||
      !std::isfinite(v.z2.imag()))
    throw std::domain_error("gauge: non-finite vector component");
}

inline double lp_norm(double a, double b, double p) {
  const double m = std::max(a, b);
  if (m == 0.0) return 0.0;
  if (p == 1.0) return a + b;
  return m * std::pow(std::pow(a / m, p) + std::pow(b / m, p), 1.0 / p);
}

// Root of t -> (a/t)^p + (b/t)^q = 1 by bisection on [max(a,b), a+b].
inline double bpq_gauge(double a, double b, double p, double q) {
  if (a == 0.0 && b == 0.0) return 0.0;
  if (b == 0.0) return a;
  if (a == 0.0) return b;
  double lo = std::max(a, b);
  double hi = a + b;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double h = std::pow(a / mid, p) + std::pow(b / mid, q);
    if (h > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Gauge at a point with nonnegative coordinates (moduli).
inline double gauge_moduli(double a, double b, const SpaceDescriptor& space) {
  if (const auto* lp = std::get_if<LpKind>(&space.kind())) return detail::lp_norm(a, b, lp->p);
  if (const auto* bq = std::get_if<BpqKind>(&space.kind())) {
    if (bq->p == bq->q) return detail::lp_norm(a, b, bq->p);
    return detail::bpq_gauge(a, b, bq->p, bq->q);
  }
  if (space.is_linf()) return std::max(a, b);
  return std::get<TabulatedGauge>(space.kind()).evaluate(a, b);
}

// Minkowski functional of the unit ball of `space` at v. Depends on v only
// through |z1| and |z2| (Reinhardt balls).
inline double gauge(const Vec2& v, const SpaceDescriptor& space) {
  detail::require_finite(v);
  return gauge_moduli(std::abs(v.z1), std::abs(v.z2), space);
}

enum class Side { Primal, Dual };

// The closed first-quadrant arc of the unit sphere of X (Primal) or of X*
// (Dual).
//
// Smooth spheres |x|^p + |y|^q = 1 are parametrized in closed form by
// psi in [0, pi/2]: x = cos(psi)^(2/p), y = sin(psi)^(2/q). The dual arc is
// the image of the primal arc under the normalized normal map
// w = grad F / <grad F, v>; at primal corners it omits the axis-parallel
// pieces of the dual sphere, which never carry the supremum of an objective
// that is nondecreasing in each coordinate. Every objective maximized here
// (quadratic forms with nonnegative coefficients, |w1| x + |w2| y) is of that
// type.
//
// Polygonal spheres are represented by their vertices.
class SphereArc {
 public:
  static constexpr int kDefaultNodes = 2048;

  SphereArc(const SpaceDescriptor& space, Side side, int nodes = kDefaultNodes) : side_(side) {
    if (nodes < 2) throw std::invalid_argument("SphereArc: need at least two nodes");
    polygonal_ = space.is_polygonal();
    if (polygonal_) {
      build_polygon(space);
      sample_polygon(nodes);
    } else {
      const auto e = space.exponents();
      p_ = e[0];
      q_ = e[1];
      build_smooth(nodes);
    }
    xx_.reserve(nodes_.size());
    xy_.reserve(nodes_.size());
    yy_.reserve(nodes_.size());
    for (const Point2& n : nodes_) {
      xx_.push_back(n.x * n.x);
      xy_.push_back(2.0 * n.x * n.y);
      yy_.push_back(n.y * n.y);
    }
  }

  bool polygonal() const { return polygonal_; }
  Side side() const { return side_; }

  // Arc-length-uniform samples from the x-axis end to the y-axis end.
  const std::vector<Point2>& nodes() const { return nodes_; }
  const std::vector<Point2>& vertices() const { return vertices_; }

  Point2 at(double psi) const {
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    double c2;
    double s2;
    if (psi <= 0.0) {
      c2 = 1.0;
      s2 = 0.0;
    } else if (psi >= kHalfPi) {
      c2 = 0.0;
      s2 = 1.0;
    } else {
      const double c = std::cos(psi);
      const double s = std::sin(psi);
      c2 = c * c;
      s2 = s * s;
    }
    const double x = std::pow(c2, 1.0 / p_);
    const double y = std::pow(s2, 1.0 / q_);
    if (side_ == Side::Primal) return {x, y};
    const double gx = p_ * std::pow(x, p_ - 1.0);
    const double gy = q_ * std::pow(y, q_ - 1.0);
    const double den = p_ * c2 + q_ * s2;
    return {gx / den, gy / den};
  }

  // Supremum of f over the arc. For polygons this is the maximum over
  // vertices, exact for convex f. Smooth arcs: best node, then golden-section
  // refinement between its neighbours to 1e-10 in the parameter.
  template <typename F>
  double maximize(F&& f) const {
    if (polygonal_) {
      double best = -kHuge;
      for (const Point2& v : vertices_) best = std::max(best, f(v));
      return best;
    }
    std::size_t arg = 0;
    double best = -kHuge;
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
      const double v = f(nodes_[k]);
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    return refine(arg, best, f);
  }

  // sup of a11 x^2 + 2 a12 x y + a22 y^2 over the arc.
  double max_quadratic(double a11, double a12, double a22) const {
    auto f = [&](const Point2& v) { return a11 * v.x * v.x + 2.0 * a12 * v.x * v.y + a22 * v.y * v.y; };
    if (polygonal_) return maximize(f);
    std::size_t arg = 0;
    double best = -kHuge;
    const std::size_t m = nodes_.size();
    for (std::size_t k = 0; k < m; ++k) {
      const double v = a11 * xx_[k] + a12 * xy_[k] + a22 * yy_[k];
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    return refine(arg, best, f);
  }

 private:
  static constexpr double kHuge = std::numeric_limits<double>::max();

  template <typename F>
  double refine(std::size_t arg, double best, F& f) const {
    const double lo = params_[arg == 0 ? 0 : arg - 1];
    const double hi = params_[std::min(arg + 1, params_.size() - 1)];
    if (hi <= lo) return best;
    const auto [psi, val] = golden_section_max([&](double t) { return f(at(t)); }, lo, hi, 1e-10);
    (void)psi;
    return std::max(best, val);
  }

  void build_polygon(const SpaceDescriptor& space) {
    std::vector<Point2> primal;
    std::vector<Point2> dual;
    if (space.is_linf()) {
      primal = {{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
      dual = {{1.0, 0.0}, {0.0, 1.0}};
    } else if (space.is_table()) {
      const auto& t = std::get<TabulatedGauge>(space.kind());
      // Axis intercepts close the quadrant path when they are edge midpoints.
      const Point2 x_end{1.0 / t.evaluate(1.0, 0.0), 0.0};
      const Point2 y_end{0.0, 1.0 / t.evaluate(0.0, 1.0)};
      primal.push_back(x_end);
      for (const Point2& v : t.vertices())
        if (v.y > 0.0 && v.x > 0.0) primal.push_back(v);
      primal.push_back(y_end);
      for (const Facet& f : t.facets()) dual.push_back({f.nx / f.h, f.ny / f.h});
      std::sort(dual.begin(), dual.end(),
                [](const Point2& a, const Point2& b) { return std::atan2(a.y, a.x) < std::atan2(b.y, b.x); });
    } else {
      // l_1
      primal = {{1.0, 0.0}, {0.0, 1.0}};
      dual = {{1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}};
    }
    vertices_ = side_ == Side::Primal ? primal : dual;
  }

  void sample_polygon(int count) {
    // Uniform arc length along the vertex path.
    std::vector<double> cum{0.0};
    for (std::size_t i = 1; i < vertices_.size(); ++i)
      cum.push_back(cum.back() + std::hypot(vertices_[i].x - vertices_[i - 1].x,
                                            vertices_[i].y - vertices_[i - 1].y));
    nodes_.clear();
    if (vertices_.size() == 1) {
      nodes_.assign(static_cast<std::size_t>(count), vertices_[0]);
      params_.assign(static_cast<std::size_t>(count), 0.0);
      return;
    }
    const double total = cum.back();
    std::size_t seg = 1;
    for (int k = 0; k < count; ++k) {
      const double target = total * k / (count - 1);
      while (seg + 1 < cum.size() && cum[seg] < target) ++seg;
      const double len = cum[seg] - cum[seg - 1];
      const double w = len > 0.0 ? std::clamp((target - cum[seg - 1]) / len, 0.0, 1.0) : 0.0;
      const Point2& a = vertices_[seg - 1];
      const Point2& b = vertices_[seg];
      nodes_.push_back({a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)});
      params_.push_back(target);
    }
  }

  void build_smooth(int count) {
    constexpr double kHalfPi = std::numbers::pi / 2.0;
    // Fine table, clustered at both ends where the chart is steep.
    constexpr int kFine = 8192;
    std::vector<double> psi(kFine + 1);
    std::vector<double> cum(kFine + 1, 0.0);
    Point2 prev = at(0.0);
    for (int j = 0; j <= kFine; ++j) {
      psi[j] = 0.5 * kHalfPi * (1.0 - std::cos(std::numbers::pi * j / kFine));
      const Point2 cur = at(psi[j]);
      if (j > 0) cum[j] = cum[j - 1] + std::hypot(cur.x - prev.x, cur.y - prev.y);
      prev = cur;
    }
    psi[kFine] = kHalfPi;
    const double total = cum[kFine];
    nodes_.clear();
    params_.clear();
    int j = 1;
    for (int k = 0; k < count; ++k) {
      double t;
      if (k == 0) {
        t = 0.0;
      } else if (k == count - 1) {
        t = kHalfPi;
      } else {
        const double target = total * k / (count - 1);
        while (j < kFine && cum[j] < target) ++j;
        const double len = cum[j] - cum[j - 1];
        const double w = len > 0.0 ? (target - cum[j - 1]) / len : 0.0;
        t = psi[j - 1] + w * (psi[j] - psi[j - 1]);
      }
      params_.push_back(t);
      nodes_.push_back(at(t));
    }
  }

  Side side_;
  bool polygonal_ = false;
  double p_ = 2.0;
  double q_ = 2.0;
  std::vector<Point2> vertices_;
  std::vector<Point2> nodes_;
  std::vector<double> params_;
  std::vector<double> xx_, xy_, yy_;
};

// sup{ |<v, w>| : gauge(v, X) <= 1 }.
inline double dual_gauge(const Vec2& w, const SpaceDescriptor& space) {
  detail::require_finite(w);
  const double a = std::abs(w.z1);
  const double b = std::abs(w.z2);
  if (a == 0.0 && b == 0.0) return 0.0;
  if (const auto* lp = std::get_if<LpKind>(&space.kind())) {
    if (lp->p == 1.0) return std::max(a, b);
    return detail::lp_norm(a, b, lp->p / (lp->p - 1.0));
  }
  if (space.is_linf()) return a + b;
  auto linear = [a, b](const Point2& v) { return a * v.x + b * v.y; };
  if (space.is_table()) {
    double best = 0.0;
    for (const Point2& v : std::get<TabulatedGauge>(space.kind()).vertices()) best = std::max(best, linear(v));
    return best;
  }
  const auto e = space.exponents();
  if (e[0] == 1.0 && e[1] == 1.0) return std::max(a, b);
  // A linear functional is unimodal along a convex arc: scan, then refine.
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  auto point = [&](double psi) {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    return Point2{psi >= kHalfPi ? 0.0 : std::pow(c * c, 1.0 / e[0]),
                  psi <= 0.0 ? 0.0 : std::pow(s * s, 1.0 / e[1])};
  };
  constexpr int kNodes = SphereArc::kDefaultNodes;
  int arg = 0;
  double best = -1.0;
  for (int k = 0; k < kNodes; ++k) {
    const double v = linear(point(kHalfPi * k / (kNodes - 1)));
    if (v > best) {
      best = v;
      arg = k;
    }
  }
  const double lo = kHalfPi * std::max(arg - 1, 0) / (kNodes - 1);
  const double hi = kHalfPi * std::min(arg + 1, kNodes - 1) / (kNodes - 1);
  const auto refined = golden_section_max([&](double t) { return linear(point(t)); }, lo, hi, 1e-12);
  return std::max(best, refined.second);
}

}  // namespace gaugelab
