#pragma once

// Certification and refutation of candidate isometries
//   Phi(z1, z2) = z1 T + z2 S  from a two-dimensional X into n x n matrices
// with the operator norm. The engine verifies the candidate on a grid of
// unit vectors, then runs the infinite-descent argument: canonicalize T to a
// positive diagonal with leading ones, find a common eigenvector (l_1) or an
// orthogonality witness (l_p, p > 2), deflate one dimension, and repeat until
// a checkable contradiction with ||T|| = ||S|| = 1 appears.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gaugelab/gauge.hpp"
#include "gaugelab/io.hpp"
#include "gaugelab/matrix.hpp"
#include "gaugelab/orthogonality.hpp"

namespace gaugelab {

// Diagonal entries of a canonical T at or above 1 - kUnitThreshold count as 1.
inline constexpr double kUnitThreshold = 1e-7;
// c = ||S zeta|| at or below this is treated as 0 (Case 2).
inline constexpr double kCaseSplit = 1e-8;

struct OperatorPair {
  DenseMatrix t;
  DenseMatrix s;
  SpaceDescriptor space;

  OperatorPair(DenseMatrix t_, DenseMatrix s_, SpaceDescriptor x) : t(std::move(t_)), s(std::move(s_)), space(std::move(x)) {
    require_same_shape(t, s);
    require_finite(t, "T");
    require_finite(s, "S");
  }
  Eigen::Index n() const { return t.rows(); }
};

struct GridPoint {
  cplx z1;
  cplx z2;
};

// Unit vectors of X: arc nodes times relative phases (16 over C, signs over R).
inline std::vector<GridPoint> unit_grid(const SpaceDescriptor& x, int grid_size) {
  if (grid_size < 256) throw std::invalid_argument("unit_grid: grid_size must be at least 256");
  const int phases = x.is_real() ? 2 : 16;
  // Odd node count keeps the midpoint of symmetric arcs on the grid.
  const int arc_nodes = ((grid_size + phases - 1) / phases) | 1;
  const SphereArc arc(x, Side::Primal, arc_nodes);
  std::vector<GridPoint> out;
  out.reserve(arc.nodes().size() * phases);
  for (const Point2& p : arc.nodes())
    for (int j = 0; j < phases; ++j) out.push_back({p.x, p.y * std::polar(1.0, 2.0 * std::numbers::pi * j / phases)});
  return out;
}

struct DeviationReport {
  double max = 0.0;
  GridPoint at{};
  double sigma = 0.0;  // sigma_max at the worst point
};

inline DeviationReport deviation_report(const DenseMatrix& t, const DenseMatrix& s, const SpaceDescriptor& x,
                                        int grid_size = 4096) {
  require_same_shape(t, s);
  DeviationReport out;
  out.max = -1.0;
  for (const GridPoint& g : unit_grid(x, grid_size)) {
    const double sigma = t.rows() == 0 ? 0.0 : opnorm(g.z1 * t + g.z2 * s);
    const double d = std::abs(sigma - 1.0);
    if (d > out.max) {
      out.max = d;
      out.at = g;
      out.sigma = sigma;
    }
  }
  return out;
}

// max over the unit grid of |sigma_max(z1 T + z2 S) - 1|.
inline double isometry_deviation(const OperatorPair& p, int grid_size = 4096) {
  return deviation_report(p.t, p.s, p.space, grid_size).max;
}

// ([[0, T], [T*, 0]], [[0, S], [S*, 0]]): both blocks self-adjoint.
inline OperatorPair selfadjoint_double(const OperatorPair& p) {
  const Eigen::Index n = p.n();
  auto dbl = [n](const DenseMatrix& m) {
    DenseMatrix out = DenseMatrix::Zero(2 * n, 2 * n);
    out.topRightCorner(n, n) = m;
    out.bottomLeftCorner(n, n) = m.adjoint();
    return out;
  };
  return {dbl(p.t), dbl(p.s), p.space};
}

struct IsometryConditions {
  double norm_t = 0.0;
  double norm_s = 0.0;
  bool norms_ok = false;
  bool t_orth_s = false;
  bool s_orth_t = false;
  std::optional<bool> parallel;  // l_1 only
  bool all_pass() const { return norms_ok && t_orth_s && s_orth_t && parallel.value_or(true); }
};

// Necessary conditions for an isometry: unit
// norms, mutual BJ orthogonality, and parallelism when X = l_1.
inline IsometryConditions isometry_conditions(const OperatorPair& p, double tol) {
  IsometryConditions r;
  r.norm_t = opnorm(p.t);
  r.norm_s = opnorm(p.s);
  const double et = gauge({1.0, 0.0}, p.space);
  const double es = gauge({0.0, 1.0}, p.space);
  r.norms_ok = std::abs(r.norm_t - et) <= tol && std::abs(r.norm_s - es) <= tol;
  if (r.norm_t > 0.0 && r.norm_s > 0.0) {
    r.t_orth_s = bj_orthogonal_definitional(p.t, p.s, tol).holds;
    r.s_orth_t = bj_orthogonal_definitional(p.s, p.t, tol).holds;
    if (p.space.is_lp() && p.space.exponents()[0] == 1.0) r.parallel = norm_parallel(p.t, p.s, tol).holds;
  }
  return r;
}

struct CanonicalForm {
  OperatorPair pair;
  DenseMatrix u;  // spectral unitary, columns ordered by |eigenvalue| descending
  DenseMatrix v;  // diagonal sign fix
  int unit_count = 0;
};

// (T, S) -> (U* T U V, U* S U V) with U* T U = diag(lambda) ordered by
// |lambda| descending and V = diag(sign lambda); T becomes diag(|lambda|).
inline CanonicalForm canonical_form(const OperatorPair& p) {
  if (!is_hermitian(p.t, 1e-9)) throw std::invalid_argument("canonical_form: T is not self-adjoint");
  const Eigen::Index n = p.n();
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(0.5 * (p.t + p.t.adjoint()));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  const Eigen::VectorXd lam = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(lam(a)) > std::abs(lam(b)); });
  DenseMatrix u(n, n);
  DenseMatrix v = DenseMatrix::Zero(n, n);
  DenseMatrix t = DenseMatrix::Zero(n, n);
  int units = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double l = lam(order[static_cast<std::size_t>(i)]);
    u.col(i) = es.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    v(i, i) = l < 0.0 ? -1.0 : 1.0;
    t(i, i) = std::abs(l);
    units += std::abs(l) >= 1.0 - kUnitThreshold;
  }
  DenseMatrix s = u.adjoint() * p.s * u * v;
  return {OperatorPair(t, s, p.space), u, v, units};
}

struct CommonEigvec {
  bool found = false;
  DenseVector zeta;
  cplx alpha = 1.0;
  double residual = INFINITY;  // ||S zeta - alpha zeta||
  // When no parallelism witness exists: upper bound on max_{|z|=1} ||T + z S||.
  double parallel_bound = 0.0;
  std::optional<OperatorPair> normalized;  // (T, conj(alpha) S)
};

// l_1 step: a parallelism witness zeta in M_T with S zeta = alpha zeta,
// |alpha| = 1, then S -> conj(alpha) S so that zeta is a common eigenvector
// with eigenvalue 1. `pair` must be canonical with `k` leading unit entries.
inline CommonEigvec common_eigvec_p1(const OperatorPair& pair, int k, double tol) {
  CommonEigvec out;
  const ParallelVerdict pv = norm_parallel(pair.t, pair.s, tol);
  if (!pv.holds || k == 0) {
    // ||T + e^{i phi} S|| is ||S||-Lipschitz in phi; the scan spacing is 2 pi / 4096.
    out.parallel_bound = pv.attained + opnorm(pair.s) * std::numbers::pi / 4096.0;
    return out;
  }
  // Locate alpha from the witness, then take the matching eigenvector of the
  // leading k x k block of S for full accuracy.
  const DenseVector& w = *pv.witness;
  DenseVector head = w.head(k);
  if (head.norm() < 1e-8) return out;
  head.normalize();
  const cplx guess = head.dot(pair.s.topLeftCorner(k, k) * head);
  Eigen::ComplexEigenSolver<DenseMatrix> es(pair.s.topLeftCorner(k, k));
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < k; ++i)
    if (std::abs(es.eigenvalues()(i) - guess) < std::abs(es.eigenvalues()(best) - guess)) best = i;
  DenseVector zeta = DenseVector::Zero(pair.n());
  zeta.head(k) = es.eigenvectors().col(best).normalized();
  const cplx alpha = es.eigenvalues()(best);
  out.zeta = zeta;
  out.residual = (pair.s * zeta - alpha * zeta).norm();
  out.alpha = alpha;
  if (out.residual > tol || std::abs(std::abs(alpha) - 1.0) > tol) return out;
  out.alpha = alpha / std::abs(alpha);
  out.found = true;
  out.normalized = OperatorPair(pair.t, std::conj(out.alpha) * pair.s, pair.space);
  return out;
}

// Orthonormal basis with first column zeta (supported on the first k
// coordinates): Gram-Schmidt of e_1..e_k after zeta, then e_{k+1}..e_n.
inline DenseMatrix deflation_basis(const DenseVector& zeta, int k) {
  const Eigen::Index n = zeta.size();
  DenseMatrix w = DenseMatrix::Zero(n, n);
  w.col(0) = zeta;
  Eigen::Index filled = 1;
  for (Eigen::Index j = 0; j < k && filled < k; ++j) {
    DenseVector e = DenseVector::Zero(n);
    e(j) = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index c = 0; c < filled; ++c) e -= w.col(c).dot(e) * w.col(c);
    if (e.norm() < 1e-8) continue;
    w.col(filled++) = e.normalized();
  }
  for (Eigen::Index j = k; j < n; ++j) w(j, j) = 1.0;
  return w;
}

struct DeflateResult {
  std::optional<OperatorPair> pair;  // (n - 1)-dimensional on success
  // l_1: norm of the first column of S1* (must be 1); p > 2: ||S1* e1|| (must be 0).
  double first_column = 0.0;
  DenseVector column;
  double identity_residual = 0.0;
  bool violated = false;
};

enum class DescentPath { L1, LpAbove2 };

// Conjugates by the deflation basis, passes to (T1, S1*), checks the first
// column and strips the first row and column. The block identity
//   ||z1 T1 + z2 S1*|| = max(|z1 t + z2 s|, ||z1 T2 + z2 S2||)
// is checked on the unit grid before the strip.
inline DeflateResult deflate(const OperatorPair& p, const DenseVector& zeta, int k, DescentPath path, double tol,
                             int grid_size = 4096) {
  if (p.n() < 1) throw std::invalid_argument("deflate: empty pair");
  const DenseMatrix w = deflation_basis(zeta, k);
  const DenseMatrix t1 = w.adjoint() * p.t * w;
  const DenseMatrix a = (w.adjoint() * p.s * w).adjoint();  // S1*
  DeflateResult out;
  const Eigen::Index m = p.n() - 1;
  out.column = a.col(0);
  if (path == DescentPath::L1) {
    // ||S1*|| >= ||S1* e1|| = sqrt(|a11|^2 + sum_i |a_i1|^2) with a11 = 1.
    out.first_column = a.col(0).norm();
    out.violated = out.first_column > 1.0 + tol;
  } else {
    out.first_column = a.col(0).norm();
    out.violated = out.first_column > kCaseSplit;
  }
  if (out.violated) return out;
  const DenseMatrix t2 = t1.bottomRightCorner(m, m);
  const DenseMatrix s2 = a.bottomRightCorner(m, m);
  double worst = 0.0;
  for (const GridPoint& g : unit_grid(p.space, grid_size)) {
    const double full = opnorm(g.z1 * t1 + g.z2 * a);
    const double corner = std::abs(g.z1 * t1(0, 0) + g.z2 * a(0, 0));
    const double rest = m == 0 ? 0.0 : opnorm(g.z1 * t2 + g.z2 * s2);
    worst = std::max(worst, std::abs(full - std::max(corner, rest)));
  }
  out.identity_residual = worst;
  out.pair = OperatorPair(t2, s2, p.space);
  return out;
}

struct AlphaGridReport {
  double alpha = 0.0;
  double min_scaled = 0.0;  // min over the grid of f(t) / t^{2p} (f(0) = c^{2p} at t = 0)
  double argmin_t = 0.0;
  int nodes = 0;
};

// alpha = p c^2 / (2 (p - 1)), half of the open bound p c^2 / (p - 1), and a
// check of f(t) = (t^2 + c^2)^p - t^{2p} - alpha t^{2p-2} >= 0 at t = 0 and
// 9999 log-spaced nodes on [1e-4, 1e4]. f / t^{2p} is evaluated as
// expm1(p log1p(c^2/t^2)) - alpha/t^2 to avoid cancellation.
inline AlphaGridReport alpha_grid_check(double c, double p) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::domain_error("alpha_grid_check: c must be positive");
  if (!(p > 2.0) || !std::isfinite(p)) throw std::domain_error("alpha_grid_check: p must exceed 2");
  AlphaGridReport r;
  r.alpha = p * c * c / (2.0 * (p - 1.0));
  r.min_scaled = std::pow(c, 2.0 * p);
  r.argmin_t = 0.0;
  r.nodes = 10000;
  for (int i = 0; i < r.nodes - 1; ++i) {
    const double t = std::pow(10.0, -4.0 + 8.0 * i / (r.nodes - 2));
    const double u = (c / t) * (c / t);
    const double g = std::expm1(p * std::log1p(u)) - r.alpha / (t * t);
    if (g < r.min_scaled) {
      r.min_scaled = g;
      r.argmin_t = t;
    }
  }
  if (!(r.min_scaled >= 0.0))
    throw std::logic_error("alpha_grid_check: f(t) < 0 on the grid at t = " + std::to_string(r.argmin_t));
  return r;
}

struct Case1Witness {
  double t_star = 0.0;
  double alpha = 0.0;
  long double lhs = 0.0;  // (t^p + 1)^2
  long double rhs = 0.0;  // t^{2p} + alpha t^{2p-2}
};

// Smallest power of two t with 2 + t^{-p} < alpha t^{p-2}, i.e. with
// (t^p + 1)^2 < t^{2p} + alpha t^{2p-2}; rechecked in long double.
inline Case1Witness case1_contradiction(double c, double p) {
  const double alpha = alpha_grid_check(c, p).alpha;
  for (int e = 0; e <= 60; ++e) {
    const double t = std::ldexp(1.0, e);
    if (!(2.0 + std::pow(t, -p) < alpha * std::pow(t, p - 2.0))) continue;
    const long double lt = t;
    const long double lp = p;
    const long double tp = std::pow(lt, lp);
    const long double lhs = (tp + 1.0L) * (tp + 1.0L);
    const long double rhs = tp * tp + static_cast<long double>(alpha) * std::pow(lt, 2.0L * lp - 2.0L);
    if (lhs < rhs) return {t, alpha, lhs, rhs};
  }
  throw std::logic_error("case1_contradiction: no witness below 2^60");
}

enum class StepKind { Verify, Double, Canonicalize, CommonEigvec, PhaseNormalize, Deflate, Case1, Terminal };

inline const char* to_string(StepKind k) {
  switch (k) {
    case StepKind::Verify: return "Verify";
    case StepKind::Double: return "Double";
    case StepKind::Canonicalize: return "Canonicalize";
    case StepKind::CommonEigvec: return "CommonEigvec";
    case StepKind::PhaseNormalize: return "PhaseNormalize";
    case StepKind::Deflate: return "Deflate";
    case StepKind::Case1: return "Case1";
    case StepKind::Terminal: return "Terminal";
  }
  return "?";
}

struct TraceStep {
  StepKind kind;
  Eigen::Index dimension;
  json data;
};

enum class VerdictKind { Refuted, IsometryCertified, Inconclusive };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Refuted: return "Refuted";
    case VerdictKind::IsometryCertified: return "IsometryCertified";
    case VerdictKind::Inconclusive: return "Inconclusive";
  }
  return "?";
}

// A numerical statement that contradicts the isometry hypothesis:
// `value` < `bound` (relation "lt") or `value` > `bound` ("gt").
struct TerminalFact {
  std::string kind;
  double value = 0.0;
  double bound = 0.0;
  std::string relation = "lt";
  json data;
  bool holds() const { return relation == "lt" ? value < bound : value > bound; }
};

struct DescentOptions {
  int max_steps = 32;
  double tol = 1e-7;
  // Refute at the first failed grid verification. With false the engine
  // records deviations but runs the structural argument regardless.
  bool verify_each_step = true;
  int grid_size = 4096;
  std::uint64_t seed = kDefaultSeed;
};

struct RefutationTrace {
  OperatorPair input;
  DescentOptions options;
  std::vector<TraceStep> steps;
  VerdictKind verdict = VerdictKind::Inconclusive;
  std::string reason;
  double max_deviation = 0.0;  // at the initial verification
  std::optional<TerminalFact> fact;

  int deflations() const {
    return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const TraceStep& s) { return s.kind == StepKind::Deflate; }));
  }
};

namespace detail {

inline json pair_json(const OperatorPair& p) { return {{"n", p.n()}, {"T", to_json(p.t)}, {"S", to_json(p.s)}}; }

inline OperatorPair pair_from_data(const json& d, const SpaceDescriptor& x) {
  const auto n = d.at("n").get<Eigen::Index>();
  return {matrix_from_json(d.at("T"), n, "T"), matrix_from_json(d.at("S"), n, "S"), x};
}

class TraceBuilder {
 public:
  explicit TraceBuilder(RefutationTrace& tr) : tr_(tr) {}

  void step(StepKind kind, Eigen::Index dim, json data = json::object()) {
    tr_.steps.push_back({kind, dim, std::move(data)});
  }

  RefutationTrace& finish(VerdictKind v, std::string reason, Eigen::Index dim, std::optional<TerminalFact> fact = {}) {
    tr_.verdict = v;
    tr_.reason = std::move(reason);
    json d{{"verdict", to_string(v)}, {"reason", tr_.reason}};
    if (fact) {
      d["fact"] = {{"kind", fact->kind}, {"value", fact->value}, {"bound", fact->bound},
                   {"relation", fact->relation}, {"data", fact->data}};
    }
    step(StepKind::Terminal, dim, d);
    tr_.fact = std::move(fact);
    return tr_;
  }

 private:
  RefutationTrace& tr_;
};

// Deviation fact at the worst grid point of a pair.
inline TerminalFact deviation_fact(const OperatorPair& p, const DeviationReport& d, double tol) {
  TerminalFact f;
  f.kind = "deviation";
  f.value = d.max;
  f.bound = tol;
  f.relation = "gt";
  f.data = pair_json(p);
  f.data["z1"] = to_json(d.at.z1);
  f.data["z2"] = to_json(d.at.z2);
  f.data["sigma"] = d.sigma;
  return f;
}

}  // namespace detail

// Runs the descent on a candidate pair. See the file comment for the loop;
// every Refuted verdict carries a TerminalFact that check_terminal_fact can
// re-derive from the recorded data alone.
inline RefutationTrace descent_run(const OperatorPair& input, const DescentOptions& opt = {}) {
  if (opt.max_steps <= 0) throw std::invalid_argument("descent_run: max_steps must be positive");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("descent_run: tol must be positive");
  RefutationTrace tr{input, opt, {}, VerdictKind::Inconclusive, {}, 0.0, std::nullopt};
  detail::TraceBuilder b(tr);
  const SpaceDescriptor& x = input.space;
  const double tol = opt.tol;

  const DeviationReport dev = deviation_report(input.t, input.s, x, opt.grid_size);
  tr.max_deviation = dev.max;
  b.step(StepKind::Verify, input.n(),
         {{"max_deviation", dev.max}, {"z1", to_json(dev.at.z1)}, {"z2", to_json(dev.at.z2)},
          {"sigma", dev.sigma}, {"enforced", opt.verify_each_step}});
  if (opt.verify_each_step && dev.max > tol)
    return b.finish(VerdictKind::Refuted, "not an isometry: grid deviation exceeds tol", input.n(),
                    detail::deviation_fact(input, dev, tol));

  std::optional<DescentPath> path;
  double p_exp = 0.0;
  if (x.is_lp()) {
    p_exp = x.exponents()[0];
    if (p_exp == 1.0) path = DescentPath::L1;
    if (p_exp > 2.0) path = DescentPath::LpAbove2;
  }
  if (!path) {
    if (dev.max <= tol)
      return b.finish(VerdictKind::IsometryCertified, "verified on the grid; descent not applicable to this space",
                      input.n());
    return b.finish(VerdictKind::Inconclusive, "descent not applicable to this space", input.n());
  }

  // An isometry has ||T|| = ||S|| = 1.
  for (const auto& [m, name, z1, z2] : {std::tuple{&input.t, "T", 1.0, 0.0}, std::tuple{&input.s, "S", 0.0, 1.0}}) {
    const double nm = opnorm(*m);
    if (std::abs(nm - 1.0) > tol) {
      TerminalFact f{"unit_norm", std::abs(nm - 1.0), tol, "gt", detail::pair_json(input)};
      f.data["z1"] = to_json(z1);
      f.data["z2"] = to_json(z2);
      f.data["sigma"] = nm;
      return b.finish(VerdictKind::Refuted, std::string("||") + name + "|| differs from 1", input.n(), f);
    }
  }

  OperatorPair cur = input;
  if (!is_hermitian(cur.t, 1e-9)) {
    cur = selfadjoint_double(cur);
    b.step(StepKind::Double, cur.n(), {{"from", input.n()}});
  }

  for (int step = 0; step < opt.max_steps; ++step) {
    if (cur.n() == 0) return b.finish(VerdictKind::Inconclusive, "deflated to dimension 0 without a contradiction", 0);
    const CanonicalForm cf = canonical_form(cur);
    const OperatorPair& cp = cf.pair;
    const int k = cf.unit_count;
    std::vector<double> diag;
    for (Eigen::Index i = 0; i < cp.n(); ++i) diag.push_back(cp.t(i, i).real());
    b.step(StepKind::Canonicalize, cp.n(), {{"unit_count", k}, {"diagonal", diag}});

    if (k == 0) {
      const double nt = opnorm(cp.t);
      TerminalFact f{"norm_below_one", nt, 1.0 - tol, "lt", detail::pair_json(cp)};
      if (nt < 1.0 - tol)
        return b.finish(VerdictKind::Refuted, "no unit diagonal entries left: ||T~|| < 1 contradicts ||T|| = 1",
                        cp.n(), f);
      return b.finish(VerdictKind::Inconclusive, "no unit entries but ||T~|| within tol of 1", cp.n());
    }

    std::optional<DeflateResult> dr;
    if (*path == DescentPath::L1) {
      const CommonEigvec ce = common_eigvec_p1(cp, k, tol);
      if (!ce.found) {
        if (ce.parallel_bound > 0.0 && ce.parallel_bound < 2.0 - tol) {
          TerminalFact f{"not_parallel", ce.parallel_bound, 2.0 - tol, "lt", detail::pair_json(cp)};
          return b.finish(VerdictKind::Refuted, "T and S not parallel: max ||T + zS|| < 2 contradicts l_1 isometry",
                          cp.n(), f);
        }
        return b.finish(VerdictKind::Inconclusive, "no common unimodular eigenvector within tol", cp.n());
      }
      b.step(StepKind::CommonEigvec, cp.n(),
             {{"zeta", vector_to_json(ce.zeta)}, {"alpha", to_json(ce.alpha)}, {"residual", ce.residual}});
      b.step(StepKind::PhaseNormalize, cp.n(), {{"alpha", to_json(ce.alpha)}});
      dr = deflate(*ce.normalized, ce.zeta, k, DescentPath::L1, tol, opt.grid_size);
      if (dr->violated) {
        TerminalFact f{"first_column_norm", dr->first_column, 1.0 + tol, "gt", {{"column", vector_to_json(dr->column)}}};
        return b.finish(VerdictKind::Refuted, "first column of S1* has norm > 1 contradicts ||S|| = 1", cp.n(), f);
      }
    } else {
      const OrthVerdict bj = bj_witness_search(cp.t, cp.s, tol, mix_seed(opt.seed, static_cast<std::uint64_t>(step)));
      if (!bj.holds) {
        if (bj.conclusive) {
          const OrthVerdict def = bj_orthogonal_definitional(cp.t, cp.s, tol);
          const cplx z = def.minimizing_scalar.value_or(0.0);
          const double val = opnorm(cp.t + z * cp.s);
          if (!def.holds) {
            TerminalFact f{"not_orthogonal", val, 1.0 - tol, "lt", detail::pair_json(cp)};
            f.data["z"] = to_json(z);
            return b.finish(VerdictKind::Refuted,
                            "T not BJ-orthogonal to S: ||T + zS|| < 1 <= ||(1, z)||_p", cp.n(), f);
          }
        }
        return b.finish(VerdictKind::Inconclusive, "orthogonality witness not found", cp.n());
      }
      // Keep zeta exactly inside span(e_1..e_k).
      DenseVector zeta = DenseVector::Zero(cp.n());
      zeta.head(k) = bj.witness->head(k);
      if (zeta.norm() < 1e-8) return b.finish(VerdictKind::Inconclusive, "witness outside the unit block", cp.n());
      zeta.normalize();
      const double c = (cp.s * zeta).norm();
      b.step(StepKind::CommonEigvec, cp.n(),
             {{"zeta", vector_to_json(zeta)}, {"c", c}, {"inner", to_json((cp.s * zeta).dot(cp.t * zeta))}});
      auto case1 = [&](double cval, const char* why) {
        const Case1Witness w = case1_contradiction(cval, p_exp);
        b.step(StepKind::Case1, cp.n(), {{"c", cval}, {"p", p_exp}, {"alpha", w.alpha}, {"t_star", w.t_star}});
        TerminalFact f{"case1", static_cast<double>(w.lhs / w.rhs), 1.0, "lt",
                       {{"c", cval}, {"p", p_exp}, {"t_star", w.t_star}, {"alpha", w.alpha}}};
        return b.finish(VerdictKind::Refuted, why, cp.n(), f);
      };
      if (c > kCaseSplit) return case1(c, "Case 1: c = ||S zeta|| > 0 forces (t^p + 1)^2 >= t^2p + alpha t^(2p-2)");
      dr = deflate(cp, zeta, k, DescentPath::LpAbove2, tol, opt.grid_size);
      if (dr->violated) return case1(dr->first_column, "Case 1 on S1* e1 after the Case 2 rotation");
    }

    const OperatorPair& next = *dr->pair;
    b.step(StepKind::Deflate, next.n(),
           {{"from", cp.n()}, {"unit_count_before", k}, {"first_column", dr->first_column},
            {"identity_residual", dr->identity_residual}});
    if (dr->identity_residual > tol)
      return b.finish(VerdictKind::Inconclusive, "block identity failed on the grid", next.n());
    if (*path == DescentPath::L1 && x.is_real())
      return b.finish(VerdictKind::Inconclusive, "density-step-inapplicable", next.n());
    if (opt.verify_each_step) {
      const DeviationReport d = deviation_report(next.t, next.s, x, opt.grid_size);
      if (d.max > tol)
        return b.finish(VerdictKind::Refuted, "deflated pair is not an isometry", next.n(),
                        detail::deviation_fact(next, d, tol));
    }
    cur = next;
  }
  return b.finish(VerdictKind::Inconclusive, "max steps reached", cur.n());
}

struct FactCheck {
  bool holds = false;
  double value = 0.0;
};

// Re-derives a terminal fact from its recorded data only.
inline FactCheck check_terminal_fact(const TerminalFact& f, const SpaceDescriptor& x) {
  FactCheck out;
  if (f.kind == "deviation" || f.kind == "unit_norm") {
    const OperatorPair p = detail::pair_from_data(f.data, x);
    const cplx z1 = complex_from_json(f.data.at("z1"), "z1");
    const cplx z2 = complex_from_json(f.data.at("z2"), "z2");
    const double g = gauge({z1, z2}, x);
    const double sigma = p.n() == 0 ? 0.0 : opnorm(z1 * p.t + z2 * p.s);
    out.value = std::abs(sigma - g);
  } else if (f.kind == "norm_below_one") {
    const OperatorPair p = detail::pair_from_data(f.data, x);
    out.value = p.n() == 0 ? 0.0 : opnorm(p.t);
  } else if (f.kind == "first_column_norm") {
    DenseVector v(static_cast<Eigen::Index>(f.data.at("column").size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = complex_from_json(f.data.at("column")[static_cast<std::size_t>(i)], "column");
    out.value = v.norm();
  } else if (f.kind == "not_orthogonal") {
    const OperatorPair p = detail::pair_from_data(f.data, x);
    out.value = opnorm(p.t + complex_from_json(f.data.at("z"), "z") * p.s);
  } else if (f.kind == "not_parallel") {
    const OperatorPair p = detail::pair_from_data(f.data, x);
    double best = 0.0;
    constexpr int kPhases = 4096;
    for (int j = 0; j < kPhases; ++j)
      best = std::max(best, opnorm(p.t + std::polar(1.0, 2.0 * std::numbers::pi * j / kPhases) * p.s));
    out.value = best + opnorm(p.s) * std::numbers::pi / kPhases;
  } else if (f.kind == "case1") {
    const double c = f.data.at("c").get<double>();
    const double p = f.data.at("p").get<double>();
    const long double t = f.data.at("t_star").get<double>();
    const long double alpha = alpha_grid_check(c, p).alpha;
    const long double tp = std::pow(t, static_cast<long double>(p));
    out.value = static_cast<double>((tp + 1.0L) * (tp + 1.0L) / (tp * tp + alpha * std::pow(t, 2.0L * p - 2.0L)));
  } else {
    throw std::invalid_argument("check_terminal_fact: unknown fact kind '" + f.kind + "'");
  }
  out.holds = f.relation == "lt" ? out.value < f.bound : out.value > f.bound;
  return out;
}

// Re-runs the recorded options on the recorded input and compares the step
// sequence and the terminal fact value.
inline bool replay_matches(const RefutationTrace& tr, double tol = 1e-9) {
  const RefutationTrace again = descent_run(tr.input, tr.options);
  if (again.verdict != tr.verdict || again.steps.size() != tr.steps.size()) return false;
  for (std::size_t i = 0; i < tr.steps.size(); ++i)
    if (again.steps[i].kind != tr.steps[i].kind || again.steps[i].dimension != tr.steps[i].dimension) return false;
  if (tr.fact.has_value() != again.fact.has_value()) return false;
  if (tr.fact) {
    if (std::abs(tr.fact->value - again.fact->value) > tol) return false;
    const FactCheck c = check_terminal_fact(*tr.fact, tr.input.space);
    if (!c.holds || std::abs(c.value - tr.fact->value) > tol) return false;
  }
  return true;
}

inline json to_json(const TerminalFact& f) {
  return {{"kind", f.kind}, {"value", f.value}, {"bound", f.bound}, {"relation", f.relation}, {"data", f.data}};
}

inline TerminalFact fact_from_json(const json& j, const std::string& path = "fact") {
  TerminalFact f;
  const json& kind = detail::require_key(j, "kind", path);
  if (!kind.is_string()) throw InputError(path + ".kind", "expected a string");
  f.kind = kind.get<std::string>();
  f.value = detail::require_number(detail::require_key(j, "value", path), path + ".value");
  f.bound = detail::require_number(detail::require_key(j, "bound", path), path + ".bound");
  const json& rel = detail::require_key(j, "relation", path);
  if (rel != "lt" && rel != "gt") throw InputError(path + ".relation", "expected \"lt\" or \"gt\"");
  f.relation = rel.get<std::string>();
  f.data = j.value("data", json::object());
  return f;
}

inline json to_json(const RefutationTrace& tr) {
  json steps = json::array();
  for (const TraceStep& s : tr.steps) steps.push_back({{"kind", to_string(s.kind)}, {"dimension", s.dimension}, {"data", s.data}});
  json out{{"input", detail::pair_json(tr.input)},
           {"space", to_json(tr.input.space)},
           {"options",
            {{"max_steps", tr.options.max_steps},
             {"tol", tr.options.tol},
             {"verify_each_step", tr.options.verify_each_step},
             {"grid_size", tr.options.grid_size},
             {"seed", tr.options.seed}}},
           {"steps", steps},
           {"verdict", to_string(tr.verdict)},
           {"reason", tr.reason},
           {"max_deviation", tr.max_deviation},
           {"deflations", tr.deflations()}};
  if (tr.fact) out["fact"] = to_json(*tr.fact);
  return out;
}

// Candidate pair file: {"n": .., "T": [[re, im], ...], "S": [...], "space": {...}}.
inline OperatorPair pair_from_json(const json& j) {
  const json& nj = detail::require_key(j, "n", "pair");
  if (!nj.is_number_integer() || nj.get<long long>() < 1) throw InputError("pair.n", "expected a positive integer");
  const auto n = nj.get<Eigen::Index>();
  const SpaceDescriptor x = space_from_json(detail::require_key(j, "space", "pair"), "pair.space");
  return {matrix_from_json(detail::require_key(j, "T", "pair"), n, "pair.T"),
          matrix_from_json(detail::require_key(j, "S", "pair"), n, "pair.S"), x};
}

inline json to_json(const OperatorPair& p) {
  json out = detail::pair_json(p);
  out["space"] = to_json(p.space);
  return out;
}

}  // namespace gaugelab
