#pragma once

// JSON encodings of spaces, matrices, vectors, verdicts and witnesses.
// Matrices are flat row-major arrays of [re, im] pairs.

#include <json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "gaugelab/gamma.hpp"
#include "gaugelab/matrix.hpp"
#include "gaugelab/orthogonality.hpp"
#include "gaugelab/space.hpp"

namespace gaugelab {

using json = nlohmann::json;

// Malformed input; `field` names the offending JSON path.
class InputError : public std::runtime_error {
 public:
  InputError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

namespace detail {

inline const json& require_key(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw InputError(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(path + "." + key, "missing field");
  return *it;
}

inline double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw InputError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw InputError(path, "non-finite number");
  return v;
}

}  // namespace detail

inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& path) {
  if (j.is_number()) return detail::require_number(j, path);
  if (!j.is_array() || j.size() != 2) throw InputError(path, "expected [re, im]");
  return {detail::require_number(j[0], path + "[0]"), detail::require_number(j[1], path + "[1]")};
}

inline json to_json(const DenseMatrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(to_json(m(i, j)));
  return out;
}

inline DenseMatrix matrix_from_json(const json& j, Eigen::Index n, const std::string& path) {
  if (!j.is_array()) throw InputError(path, "expected an array of [re, im] entries");
  if (static_cast<Eigen::Index>(j.size()) != n * n)
    throw InputError(path, "expected " + std::to_string(n * n) + " entries, got " + std::to_string(j.size()));
  DenseMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto idx = static_cast<std::size_t>(i * n + k);
      m(i, k) = complex_from_json(j[idx], path + "[" + std::to_string(idx) + "]");
    }
  return m;
}

inline json vector_to_json(const DenseVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

inline json to_json(const SpaceDescriptor& x) {
  json out;
  if (x.is_lp()) {
    out["kind"] = "lp";
    out["p"] = x.exponents()[0];
  } else if (x.is_bpq()) {
    out["kind"] = "bpq";
    out["p"] = x.exponents()[0];
    out["q"] = x.exponents()[1];
  } else if (x.is_linf()) {
    out["kind"] = "linf";
  } else {
    out["kind"] = "table";
    json pts = json::array();
    for (const Point2& p : std::get<TabulatedGauge>(x.kind()).samples()) pts.push_back({p.x, p.y});
    out["points"] = pts;
  }
  out["field"] = x.is_real() ? "real" : "complex";
  return out;
}

inline SpaceDescriptor space_from_json(const json& j, const std::string& path = "space") {
  const json& kind = detail::require_key(j, "kind", path);
  if (!kind.is_string()) throw InputError(path + ".kind", "expected a string");
  Field field = Field::Complex;
  if (const auto it = j.find("field"); it != j.end()) {
    if (*it == "real") {
      field = Field::Real;
    } else if (*it != "complex") {
      throw InputError(path + ".field", "expected \"real\" or \"complex\"");
    }
  }
  const std::string k = kind.get<std::string>();
  try {
    if (k == "lp") return SpaceDescriptor::lp(detail::require_number(detail::require_key(j, "p", path), path + ".p"), field);
    if (k == "bpq")
      return SpaceDescriptor::bpq(detail::require_number(detail::require_key(j, "p", path), path + ".p"),
                                  detail::require_number(detail::require_key(j, "q", path), path + ".q"), field);
    if (k == "linf") return SpaceDescriptor::linf(field);
    if (k == "table") {
      const json& pts = detail::require_key(j, "points", path);
      if (!pts.is_array()) throw InputError(path + ".points", "expected an array of [x, y]");
      std::vector<Point2> samples;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string p = path + ".points[" + std::to_string(i) + "]";
        if (!pts[i].is_array() || pts[i].size() != 2) throw InputError(p, "expected [x, y]");
        samples.push_back({detail::require_number(pts[i][0], p), detail::require_number(pts[i][1], p)});
      }
      return SpaceDescriptor::table(std::move(samples), field);
    }
  } catch (const std::domain_error& e) {
    throw InputError(path, e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(path, e.what());
  }
  throw InputError(path + ".kind", "unknown kind '" + k + "'");
}

// "lp:1.5", "bpq:1,2", "linf", each optionally suffixed with ":real".
inline SpaceDescriptor parse_space(const std::string& text) {
  std::string s = text;
  Field field = Field::Complex;
  const std::string suffix = ":real";
  if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
    field = Field::Real;
    s.resize(s.size() - suffix.size());
  }
  auto number = [&](const std::string& t) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw InputError("space", "bad number '" + t + "' in '" + text + "'");
    }
    if (used != t.size()) throw InputError("space", "bad number '" + t + "' in '" + text + "'");
    return v;
  };
  try {
    if (s == "linf") return SpaceDescriptor::linf(field);
    if (s.rfind("lp:", 0) == 0) return SpaceDescriptor::lp(number(s.substr(3)), field);
    if (s.rfind("bpq:", 0) == 0) {
      const std::string rest = s.substr(4);
      const auto comma = rest.find(',');
      if (comma == std::string::npos) throw InputError("space", "expected bpq:p,q in '" + text + "'");
      return SpaceDescriptor::bpq(number(rest.substr(0, comma)), number(rest.substr(comma + 1)), field);
    }
  } catch (const std::domain_error& e) {
    throw InputError("space", e.what());
  }
  throw InputError("space", "unrecognised space '" + text + "' (use lp:p, bpq:p,q or linf, optional :real)");
}

inline json to_json(const OrthVerdict& v) {
  json out{{"holds", v.holds}, {"conclusive", v.conclusive}, {"residual", v.residual}};
  if (v.witness) out["witness"] = vector_to_json(*v.witness);
  if (v.minimizing_scalar) out["minimizing_scalar"] = to_json(*v.minimizing_scalar);
  if (!v.note.empty()) out["note"] = v.note;
  return out;
}

inline json to_json(const ParallelVerdict& v) {
  json out{{"holds", v.holds}, {"attained", v.attained}};
  if (v.witness) out["witness"] = vector_to_json(*v.witness);
  if (v.phase) out["phase"] = to_json(*v.phase);
  return out;
}

inline json to_json(const GammaWitness& w) {
  return {{"A", to_json(w.a)}, {"B", to_json(w.b)}, {"value", w.value}, {"normA", w.norm_a}, {"normB", w.norm_b}};
}

}  // namespace gaugelab
