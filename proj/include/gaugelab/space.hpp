#pragma once

// Two-dimensional normed spaces with Reinhardt unit balls.
//
// Every space here is described by its unit sphere in the closed first
// quadrant; the full ball is recovered by independent rotation (complex
// field) or sign change (real field) of each coordinate.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gaugelab {

using cplx = std::complex<double>;

enum class Field { Real, Complex };

struct Vec2 {
  cplx z1{};
  cplx z2{};
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct LpKind {
  double p = 2.0;
};

struct BpqKind {
  double p = 1.0;
  double q = 2.0;
};

struct LinfKind {};

// A facet of the quadrant part of a symmetric polygon: {v : nx*x + ny*y = h}.
struct Facet {
  double nx = 0.0;
  double ny = 0.0;
  double h = 1.0;
};

// Convex polygon built from boundary samples. The stored data is the part
// of the symmetric hull lying in the closed first quadrant.
class TabulatedGauge {
 public:
  TabulatedGauge() = default;

  explicit TabulatedGauge(std::vector<Point2> samples) : samples_(std::move(samples)) {
    repair();
  }

  const std::vector<Point2>& samples() const { return samples_; }
  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }

  // Minkowski functional of the hull at a first-quadrant point.
  double evaluate(double x, double y) const {
    double g = 0.0;
    for (const Facet& f : facets_) g = std::max(g, (f.nx * x + f.ny * y) / f.h);
    return g;
  }

 private:
  // Convexity repair: replace the samples by the convex hull of their
  // reflections across both axes, then keep the first-quadrant facets.
  void repair() {
    if (samples_.empty()) throw std::invalid_argument("table: no boundary samples");
    std::vector<Point2> cloud;
    cloud.reserve(4 * samples_.size());
    bool has_x = false;
    bool has_y = false;
    for (const Point2& s : samples_) {
      if (!std::isfinite(s.x) || !std::isfinite(s.y))
        throw std::domain_error("table: non-finite boundary sample");
      const double ax = std::abs(s.x);
      const double ay = std::abs(s.y);
      has_x = has_x || ax > 0.0;
      has_y = has_y || ay > 0.0;
      cloud.push_back({ax, ay});
      cloud.push_back({-ax, ay});
      cloud.push_back({ax, -ay});
      cloud.push_back({-ax, -ay});
    }
    if (!has_x || !has_y)
      throw std::invalid_argument("table: samples do not span both coordinate directions");

    std::sort(cloud.begin(), cloud.end(), [](const Point2& a, const Point2& b) {
      return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    cloud.erase(std::unique(cloud.begin(), cloud.end(),
                            [](const Point2& a, const Point2& b) { return a.x == b.x && a.y == b.y; }),
                cloud.end());

    // Andrew's monotone chain, counter-clockwise, collinear points dropped.
    auto cross = [](const Point2& o, const Point2& a, const Point2& b) {
      return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point2> hull(2 * cloud.size());
    std::size_t k = 0;
    for (const Point2& p : cloud) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
      hull[k++] = p;
    }
    for (std::size_t i = cloud.size() - 1, lower = k + 1; i-- > 0;) {
      while (k >= lower && cross(hull[k - 2], hull[k - 1], cloud[i]) <= 0.0) --k;
      hull[k++] = cloud[i];
    }
    hull.resize(k - 1);

    vertices_.clear();
    facets_.clear();
    const std::size_t m = hull.size();
    for (std::size_t i = 0; i < m; ++i) {
      const Point2& a = hull[i];
      const Point2& b = hull[(i + 1) % m];
      // Outward normal of a counter-clockwise edge.
      const double nx = b.y - a.y;
      const double ny = a.x - b.x;
      if (nx < 0.0 || ny < 0.0) continue;
      const double h = nx * a.x + ny * a.y;
      if (!(h > 0.0)) throw std::invalid_argument("table: hull does not contain the origin");
      facets_.push_back({nx, ny, h});
    }
    for (const Point2& v : hull)
      if (v.x >= 0.0 && v.y >= 0.0) vertices_.push_back(v);
    // Order from the x-axis to the y-axis.
    std::sort(vertices_.begin(), vertices_.end(),
              [](const Point2& a, const Point2& b) { return std::atan2(a.y, a.x) < std::atan2(b.y, b.x); });
  }

  std::vector<Point2> samples_;
  std::vector<Point2> vertices_;
  std::vector<Facet> facets_;
};

class SpaceDescriptor {
 public:
  using Kind = std::variant<LpKind, BpqKind, LinfKind, TabulatedGauge>;

  SpaceDescriptor() : kind_(LpKind{2.0}), field_(Field::Complex) {}
  SpaceDescriptor(Kind kind, Field field) : kind_(std::move(kind)), field_(field) { validate(); }

  static SpaceDescriptor lp(double p, Field field = Field::Complex) { return {LpKind{p}, field}; }
  static SpaceDescriptor bpq(double p, double q, Field field = Field::Complex) {
    return {BpqKind{p, q}, field};
  }
  static SpaceDescriptor linf(Field field = Field::Complex) { return {LinfKind{}, field}; }
  static SpaceDescriptor table(std::vector<Point2> samples, Field field = Field::Complex) {
    return {TabulatedGauge(std::move(samples)), field};
  }

  const Kind& kind() const { return kind_; }
  Field field() const { return field_; }
  bool is_real() const { return field_ == Field::Real; }

  bool is_lp() const { return std::holds_alternative<LpKind>(kind_); }
  bool is_bpq() const { return std::holds_alternative<BpqKind>(kind_); }
  bool is_linf() const { return std::holds_alternative<LinfKind>(kind_); }
  bool is_table() const { return std::holds_alternative<TabulatedGauge>(kind_); }

  // Exponents (p, q) of the defining equation |x|^p + |y|^q = 1, when the
  // sphere has one. Lp(p) reports (p, p).
  std::array<double, 2> exponents() const {
    if (const auto* lp = std::get_if<LpKind>(&kind_)) return {lp->p, lp->p};
    if (const auto* b = std::get_if<BpqKind>(&kind_)) return {b->p, b->q};
    throw std::logic_error("space has no exponent pair");
  }

  // True when the unit sphere is a polygon (evaluated through facets).
  bool is_polygonal() const {
    if (is_linf() || is_table()) return true;
    const auto e = exponents();
    return e[0] == 1.0 && e[1] == 1.0;
  }

  SpaceDescriptor with_field(Field field) const {
    SpaceDescriptor out = *this;
    out.field_ = field;
    return out;
  }

  std::string describe() const {
    std::string out;
    if (const auto* lp = std::get_if<LpKind>(&kind_)) {
      out = "lp:" + format_number(lp->p);
    } else if (const auto* b = std::get_if<BpqKind>(&kind_)) {
      out = "bpq:" + format_number(b->p) + "," + format_number(b->q);
    } else if (is_linf()) {
      out = "linf";
    } else {
      out = "table";
    }
    if (is_real()) out += ":real";
    return out;
  }

 private:
  static std::string format_number(double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  }

  void validate() const {
    auto check = [](double e, const char* name) {
      if (!std::isfinite(e) || e < 1.0)
        throw std::domain_error(std::string("exponent ") + name + " must be finite and >= 1");
    };
    if (const auto* lp = std::get_if<LpKind>(&kind_)) check(lp->p, "p");
    if (const auto* b = std::get_if<BpqKind>(&kind_)) {
      check(b->p, "p");
      check(b->q, "q");
    }
  }

  Kind kind_;
  Field field_;
};

// The same ball viewed as a real space. Gauges agree on real vectors.
inline SpaceDescriptor real_shadow(const SpaceDescriptor& space) {
  if (space.is_real()) throw std::invalid_argument("real_shadow: space is already real");
  return space.with_field(Field::Real);
}

}  // namespace gaugelab
