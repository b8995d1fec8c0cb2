#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "gaugelab/gamma.hpp"

using namespace gaugelab;

namespace {

constexpr double kPi = std::numbers::pi;

// sup of z^T A z over a closed polygonal curve given by its vertices, using
// dense points on every edge (sign patterns included), for real symmetric A.
double polygon_quadratic_sup(const std::vector<Point2>& verts, double a11, double a12, double a22, int per_edge = 64) {
  double best = -INFINITY;
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const Point2& p = verts[i];
    const Point2& q = verts[(i + 1) % verts.size()];
    for (int k = 0; k <= per_edge; ++k) {
      const double t = static_cast<double>(k) / per_edge;
      const double x = p.x + t * (q.x - p.x);
      const double y = p.y + t * (q.y - p.y);
      best = std::max(best, a11 * x * x + 2 * a12 * x * y + a22 * y * y);
    }
  }
  return best;
}

// Exhaustive coarse grid over the six-parameter box for the real square,
// evaluating both norms on the square and the diamond directly.
double linf_grid_oracle(int m) {
  const std::vector<Point2> square{{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const std::vector<Point2> diamond{{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  double best = 0.0;
  std::vector<double> g(m + 1);
  for (int i = 0; i <= m; ++i) g[i] = static_cast<double>(i) / m;
  // Off-diagonal spans both signs so that nothing is assumed about A^+.
  for (double a11 : g)
    for (double a22 : g)
      for (double ra : g)
        for (double sa : {1.0, -1.0}) {
          const double a12 = sa * ra * std::sqrt(a11 * a22);
          const double na = polygon_quadratic_sup(square, a11, a12, a22, 4);
          if (na <= 0) continue;
          for (double b11 : g)
            for (double b22 : g)
              for (double rb : g)
                for (double sb : {1.0, -1.0}) {
                  const double b12 = sb * rb * std::sqrt(b11 * b22);
                  const double nb = polygon_quadratic_sup(diamond, b11, b12, b22, 4);
                  if (nb <= 0) continue;
                  best = std::max(best, (a11 * b11 + a22 * b22 + 2 * a12 * b12) / (na * nb));
                }
        }
  return best;
}

template <typename Rng>
DenseMatrix random_psd2(Rng& rng) {
  const DenseMatrix g = random_gaussian(2, rng);
  return g * g.adjoint();
}

}  // namespace

TEST(GammaLowerBound, Examples) {
  const DenseMatrix id = DenseMatrix::Identity(2, 2);
  const GammaWitness w = gamma_lower_bound(SpaceDescriptor::lp(2), id, id);
  EXPECT_NEAR(w.value, 2.0, 1e-9);
  EXPECT_NEAR(w.norm_a, 1.0, 1e-12);
  EXPECT_NEAR(w.norm_b, 1.0, 1e-12);

  const DenseMatrix e11 = unit_matrix(2, 0, 0);
  EXPECT_NEAR(gamma_lower_bound(SpaceDescriptor::linf(Field::Real), e11, e11).value, 1.0, 1e-12);

  // All-ones on l_1: its X -> X* norm is sup (x + y)^2 on the l_1 arc = 1;
  // e11 as a map X* -> X has norm sup w1^2 over the square = 1.
  const DenseMatrix ones = DenseMatrix::Ones(2, 2);
  const GammaWitness l1 = gamma_lower_bound(SpaceDescriptor::lp(1), ones, e11);
  EXPECT_NEAR(l1.value, 1.0, 1e-12);

  EXPECT_THROW(gamma_lower_bound(SpaceDescriptor::lp(2), DenseMatrix::Zero(2, 2), id), std::invalid_argument);
  EXPECT_THROW(gamma_lower_bound(SpaceDescriptor::lp(2), diag({1.0, -1.0}), id), std::invalid_argument);
}

TEST(GammaEstimate, L2IsTwo) {
  const auto t0 = std::chrono::steady_clock::now();
  const GammaWitness w = gamma_estimate(SpaceDescriptor::lp(2));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_NEAR(w.value, 2.0, 1e-3);
  EXPECT_LT(secs, 5.0);
  EXPECT_NEAR(alpha_lower_bound(SpaceDescriptor::lp(2), {4, 50}), std::sqrt(2.0), 1e-3);
}

TEST(GammaEstimate, RealSquareMatchesGridOracle) {
  const auto x = SpaceDescriptor::linf(Field::Real);
  const GammaWitness w = gamma_estimate(x);
  EXPECT_LE(w.value, 1.0 + 1e-6);
  EXPECT_GE(w.value, 1.0 - 1e-3);
  const double oracle = linf_grid_oracle(5);
  EXPECT_NEAR(oracle, 1.0, 1e-12);
  EXPECT_LE(w.value, oracle + 1e-6);
  EXPECT_EQ(property_p_verdict(x).kind, PropertyPVerdict::Kind::NotRefuted);
  EXPECT_LE(alpha_lower_bound(x), 1.0 + 1e-6);
}

TEST(GammaEstimate, SpacesWithoutPropertyP) {
  for (const auto& x : {SpaceDescriptor::bpq(1, 2), SpaceDescriptor::bpq(3, 3), SpaceDescriptor::lp(1.5)}) {
    const PropertyPVerdict v = property_p_verdict(x);
    EXPECT_EQ(v.kind, PropertyPVerdict::Kind::Fails) << x.describe();
    EXPECT_GT(v.witness.value, 1.0 + kPropertyPMargin);
    EXPECT_TRUE(is_psd(v.witness.a));
    EXPECT_TRUE(is_psd(v.witness.b));
    EXPECT_LE(v.witness.norm_a, 1.0 + 1e-9);
    EXPECT_LE(v.witness.norm_b, 1.0 + 1e-9);
    EXPECT_NEAR(v.witness.value, hs_inner(v.witness.a, v.witness.b), 1e-12);
  }
  EXPECT_GT(alpha_lower_bound(SpaceDescriptor::bpq(1, 2), {8, 100}), 1.0);
}

TEST(GammaEstimate, ZeroBudgetRejected) {
  EXPECT_THROW(gamma_estimate(SpaceDescriptor::lp(2), {0, 10}), std::invalid_argument);
  EXPECT_THROW(gamma_estimate(SpaceDescriptor::lp(2), {3, 0}), std::invalid_argument);
}

TEST(GammaProperty, AtLeastOneEverywhere) {
  const DenseMatrix e11 = unit_matrix(2, 0, 0);
  for (const auto& x : {SpaceDescriptor::lp(1), SpaceDescriptor::lp(3), SpaceDescriptor::bpq(1.5, 4),
                        SpaceDescriptor::linf(), SpaceDescriptor::table({{1, 0}, {0.8, 0.7}, {0, 1}})}) {
    EXPECT_GE(gamma_lower_bound(x, e11, e11).value, 1.0 - 1e-6) << x.describe();
  }
}

TEST(GammaProperty, BudgetMonotone) {
  const QuadraticNorms norms(SpaceDescriptor::bpq(1.5, 4));
  double prev = -1.0;
  for (GammaBudget b : {GammaBudget{2, 20}, GammaBudget{4, 20}, GammaBudget{4, 80}, GammaBudget{12, 80}}) {
    const double v = gamma_estimate(norms, b).value;
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
}

TEST(GammaProperty, APlusSearchLosesNothing) {
  std::mt19937_64 rng(12);
  const QuadraticNorms norms(SpaceDescriptor::bpq(1, 2));
  for (int i = 0; i < 100; ++i) {
    const DenseMatrix a = random_psd2(rng);
    const DenseMatrix b = random_psd2(rng);
    const double plain = hs_inner(a, b) / (norms.x_to_dual(a) * norms.dual_to_x(b));
    const DenseMatrix ap = a_plus(a);
    const DenseMatrix bp = a_plus(b);
    const double plus = hs_inner(ap, bp) / (norms.x_to_dual(ap) * norms.dual_to_x(bp));
    EXPECT_GE(plus, plain - 1e-9);
  }
}

TEST(GammaProperty, DualitySymmetry) {
  const GammaBudget budget{16, 200};
  EXPECT_NEAR(gamma_estimate(SpaceDescriptor::lp(1.5), budget).value,
              gamma_estimate(SpaceDescriptor::lp(3), budget).value, 2e-3);
  const auto b12 = SpaceDescriptor::bpq(1, 2);
  EXPECT_NEAR(gamma_estimate(b12, budget).value, gamma_estimate(dual_space(b12), budget).value, 2e-3);
  EXPECT_TRUE(dual_space(SpaceDescriptor::linf()).is_lp());
  EXPECT_TRUE(dual_space(SpaceDescriptor::lp(1)).is_linf());
}

TEST(Transfer, Examples) {
  const DenseMatrix id = DenseMatrix::Identity(2, 2);
  const auto x = SpaceDescriptor::lp(2);
  const GammaWitness real = gamma_lower_bound(real_shadow(x), id, id);
  const GammaWitness lifted = transfer_lift(x, real);
  EXPECT_NEAR(lifted.value, 2.0, 1e-12);
  EXPECT_THROW(transfer_lift(real_shadow(x), real), std::invalid_argument);
  GammaWitness bad = real;
  bad.a(0, 1) = bad.a(1, 0) = -0.1;
  EXPECT_THROW(transfer_lift(x, bad), std::invalid_argument);
}

TEST(TransferProperty, LiftIsExact) {
  std::mt19937_64 rng(40);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const auto& x : {SpaceDescriptor::bpq(1, 2), SpaceDescriptor::lp(3), SpaceDescriptor::bpq(1.5, 4)}) {
    const SpaceDescriptor shadow = real_shadow(x);
    const QuadraticNorms norms(shadow);
    for (int i = 0; i < 20; ++i) {
      const double a11 = u(rng), a22 = u(rng), b11 = u(rng), b22 = u(rng);
      const GammaWitness w = gamma_lower_bound(shadow, detail::real_psd(a11, u(rng) * std::sqrt(a11 * a22), a22),
                                               detail::real_psd(b11, u(rng) * std::sqrt(b11 * b22), b22), norms);
      const GammaWitness lifted = transfer_lift(x, w);
      EXPECT_NEAR(lifted.value, w.value, 1e-12);
      EXPECT_NEAR(lifted.norm_a, w.norm_a, 1e-12);
      EXPECT_NEAR(lifted.norm_b, w.norm_b, 1e-12);
    }
  }
}

TEST(TransferProperty, ComplexSearchAgreesWithRealShadow) {
  const GammaBudget budget{8, 100};
  const auto x = SpaceDescriptor::bpq(1, 2);
  EXPECT_NEAR(gamma_estimate(x, budget).value, gamma_estimate(real_shadow(x), budget).value, 1e-12);
}

TEST(ExtremePoints, Examples) {
  const auto square = SpaceDescriptor::linf(Field::Real);
  EXPECT_TRUE(extreme_point_test(square, {1, 1}));
  EXPECT_FALSE(extreme_point_test(square, {1, 0}));
  EXPECT_FALSE(extreme_point_test(square, {-0.3, 1}));
  const auto disc = SpaceDescriptor::bpq(2, 2, Field::Real);
  for (int k = 0; k < 24; ++k) EXPECT_TRUE(extreme_point_test(disc, {std::cos(kPi * k / 12), std::sin(kPi * k / 12)}));
  EXPECT_TRUE(extreme_point_test(SpaceDescriptor::bpq(1, 2, Field::Real), {0, 1}));
  EXPECT_TRUE(extreme_point_test(SpaceDescriptor::lp(1, Field::Real), {1, 0}));
  EXPECT_FALSE(extreme_point_test(SpaceDescriptor::lp(1, Field::Real), {0.5, -0.5}));
  EXPECT_THROW(extreme_point_test(square, {0.5, 0.5}), std::invalid_argument);
}

TEST(ExtremePoints, Counts) {
  EXPECT_EQ(count_extreme_points(SpaceDescriptor::linf(Field::Real)), 4);
  EXPECT_EQ(count_extreme_points(SpaceDescriptor::lp(1, Field::Real)), 4);
  // Hexagon: (1, 0), (0.5, 1) and reflections.
  EXPECT_EQ(count_extreme_points(SpaceDescriptor::table({{1, 0}, {0.5, 1}, {0, 1}}, Field::Real)), 6);
  for (const auto& x : {SpaceDescriptor::bpq(1, 2, Field::Real), SpaceDescriptor::bpq(3, 3, Field::Real),
                        SpaceDescriptor::lp(1.5, Field::Real), SpaceDescriptor::lp(16, Field::Real)}) {
    EXPECT_GT(count_extreme_points(x), 4) << x.describe();
  }
}

TEST(Parrot, Examples) {
  std::mt19937_64 rng(1);
  const DenseMatrix t1 = random_gaussian(2, rng);
  const DenseMatrix t2 = random_gaussian(2, rng);
  const DenseMatrix one = parrot_block(Polynomial::constant(1.0), {0.3, -0.2}, t1, t2);
  EXPECT_TRUE(one.isApprox(DenseMatrix::Identity(4, 4)));
  const Polynomial z1({{0.0}, {1.0}});
  const DenseMatrix b = parrot_block(z1, {0.0, 0.0}, t1, t2);
  EXPECT_LT(b.topLeftCorner(2, 2).norm() + b.bottomRightCorner(2, 2).norm() + b.bottomLeftCorner(2, 2).norm(), 1e-15);
  EXPECT_TRUE(b.topRightCorner(2, 2).isApprox(t1));
  const Polynomial z1z2({{0.0, 0.0}, {0.0, 1.0}});
  const Vec2 w{0.4, cplx(0.1, 0.7)};
  const DenseMatrix lhs = parrot_block(z1z2 * z1, w, t1, t2);
  const DenseMatrix rhs = parrot_block(z1z2, w, t1, t2) * parrot_block(z1, w, t1, t2);
  EXPECT_LT((lhs - rhs).norm(), 1e-12);
  EXPECT_THROW(Polynomial({}), std::invalid_argument);
  EXPECT_THROW(Polynomial({{1.0, 2.0}, {3.0}}), std::invalid_argument);
}

TEST(ParrotProperty, Homomorphism) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n;
  std::uniform_int_distribution<int> deg(0, 3);
  auto random_poly = [&] {
    const int d = deg(rng);
    std::vector<std::vector<cplx>> c(d + 1, std::vector<cplx>(d + 1));
    for (int i = 0; i <= d; ++i)
      for (int j = 0; i + j <= d; ++j) c[i][j] = cplx(n(rng), n(rng));
    return Polynomial(c);
  };
  for (int i = 0; i < 100; ++i) {
    const Polynomial f = random_poly();
    const Polynomial g = random_poly();
    const Vec2 w{cplx(n(rng), n(rng)) * 0.5, cplx(n(rng), n(rng)) * 0.5};
    const DenseMatrix t1 = random_gaussian(2, rng);
    const DenseMatrix t2 = random_gaussian(2, rng);
    const DenseMatrix lhs = parrot_block(f * g, w, t1, t2);
    const DenseMatrix rhs = parrot_block(f, w, t1, t2) * parrot_block(g, w, t1, t2);
    EXPECT_LE((lhs - rhs).norm(), 1e-9 * std::max(1.0, lhs.norm()));
  }
}
