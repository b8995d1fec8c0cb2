#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "candidates.hpp"
#include "gaugelab/descent.hpp"

using namespace gaugelab;
using gaugelab::testing::b12_pair;
using gaugelab::testing::b12_pair_as_stated;
using gaugelab::testing::l1_refutation_candidate;
using gaugelab::testing::real_l1_pair;

namespace {

// The alpha-grid function evaluated directly (no rescaling), for moderate t.
double f_direct(double t, double c, double p, double alpha) {
  return std::pow(t * t + c * c, p) - std::pow(t, 2 * p) - alpha * std::pow(t, 2 * p - 2);
}

std::vector<OperatorPair> corpus_like() {
  std::mt19937_64 rng(kDefaultSeed);
  std::vector<OperatorPair> out{real_l1_pair(), b12_pair(), b12_pair_as_stated()};
  for (Eigen::Index n : {4, 6, 8}) out.push_back(l1_refutation_candidate(n, static_cast<int>(n) / 2 - 1, rng));
  return out;
}

}  // namespace

TEST(Deviation, Examples) {
  EXPECT_LE(isometry_deviation(b12_pair()), 1e-9);
  EXPECT_LE(isometry_deviation(real_l1_pair()), 1e-12);
  const OperatorPair ii(DenseMatrix::Identity(2, 2), DenseMatrix::Identity(2, 2), SpaceDescriptor::lp(1));
  EXPECT_GE(isometry_deviation(ii), 1.0 - 1e-12);
  EXPECT_THROW(isometry_deviation(ii, 100), std::invalid_argument);
}

TEST(Deviation, PairAsStatedIsNotIsometricOnB12) {
  // sigma_max(z1 I + z2 e12) = 1 on |z1|^2 + |z2| = 1, the sphere of B_{2,1}.
  EXPECT_GT(isometry_deviation(b12_pair_as_stated()), 0.05);
  const OperatorPair swapped(DenseMatrix::Identity(2, 2), unit_matrix(2, 0, 1), SpaceDescriptor::bpq(2, 1));
  EXPECT_LE(isometry_deviation(swapped), 1e-9);
}

TEST(Deviation, MatchesClosedFormOnB12) {
  // Independent closed form for the 2x2 Jordan-type pair.
  const OperatorPair p = b12_pair_as_stated();
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double y = k / 2000.0;  // |z2| on the B_{1,2} sphere, |z1| = 1 - y^2
    const double x = 1.0 - y * y;
    worst = std::max(worst, std::abs(y / 2 + std::sqrt(y * y / 4 + x * x) - 1.0));
  }
  EXPECT_NEAR(isometry_deviation(p, 1 << 14), worst, 1e-5);
}

TEST(Double, Examples) {
  const OperatorPair p(unit_matrix(2, 0, 1), DenseMatrix::Identity(2, 2), SpaceDescriptor::lp(1));
  const OperatorPair d = selfadjoint_double(p);
  EXPECT_EQ(d.n(), 4);
  EXPECT_TRUE(is_hermitian(d.t, 0.0));
  EXPECT_TRUE(is_hermitian(d.s, 0.0));
  EXPECT_EQ(d.t(0, 3), cplx(1.0));
  EXPECT_EQ(d.t(3, 0), cplx(1.0));
  const OperatorPair h(diag({1.0, 0.5}), diag({0.2, 1.0}), SpaceDescriptor::lp(1));
  EXPECT_TRUE(is_hermitian(selfadjoint_double(h).t, 0.0));
}

TEST(IsometryConditions, Examples) {
  const IsometryConditions a = isometry_conditions(b12_pair_as_stated(), 1e-9);
  EXPECT_TRUE(a.norms_ok);
  EXPECT_TRUE(a.t_orth_s);
  EXPECT_TRUE(a.s_orth_t);
  const IsometryConditions b = isometry_conditions(real_l1_pair(), 1e-9);
  ASSERT_TRUE(b.parallel.has_value());
  EXPECT_TRUE(*b.parallel);
  const ParallelVerdict pv = norm_parallel(real_l1_pair().t, real_l1_pair().s, 1e-9);
  EXPECT_NEAR(std::abs(*pv.phase - 1.0), 0.0, 1e-9);
  const OperatorPair half(0.5 * DenseMatrix::Identity(2, 2), unit_matrix(2, 0, 1), SpaceDescriptor::lp(1));
  EXPECT_FALSE(isometry_conditions(half, 1e-9).norms_ok);
  EXPECT_FALSE(isometry_conditions(half, 1e-9).all_pass());
}

TEST(Canonical, Examples) {
  const OperatorPair p(diag({-1.0, 0.3}), diag({0.5, cplx(0, 1)}), SpaceDescriptor::lp(1));
  const CanonicalForm c = canonical_form(p);
  EXPECT_NEAR(c.pair.t(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(c.pair.t(1, 1).real(), 0.3, 1e-14);
  EXPECT_EQ(c.unit_count, 1);
  EXPECT_NEAR(std::abs(c.v(0, 0) + 1.0), 0.0, 0.0);
  EXPECT_NEAR(std::abs(c.v(1, 1) - 1.0), 0.0, 0.0);
  EXPECT_THROW(canonical_form(OperatorPair(unit_matrix(2, 0, 1), diag({1.0, 1.0}), SpaceDescriptor::lp(1))),
               std::invalid_argument);
}

TEST(Canonical, RandomHermitianAndDeviationUnchanged) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    const DenseMatrix g = random_gaussian(4, rng);
    const DenseMatrix h = (g + g.adjoint()) / opnorm(g + g.adjoint());
    const DenseMatrix s = random_gaussian(4, rng);
    const OperatorPair p(h, s / opnorm(s), SpaceDescriptor::lp(1));
    const CanonicalForm c = canonical_form(p);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h);
    std::vector<double> mods;
    for (int j = 0; j < 4; ++j) mods.push_back(std::abs(es.eigenvalues()(j)));
    std::sort(mods.rbegin(), mods.rend());
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(c.pair.t(j, j).real(), mods[static_cast<std::size_t>(j)], 1e-12);
      EXPECT_GE(c.pair.t(j, j).real(), 0.0);
    }
    EXPECT_NEAR(isometry_deviation(c.pair, 512), isometry_deviation(p, 512), 1e-10);
  }
}

TEST(CommonEigvec, Examples) {
  const CanonicalForm c = canonical_form(real_l1_pair());
  const CommonEigvec a = common_eigvec_p1(c.pair, c.unit_count, 1e-9);
  ASSERT_TRUE(a.found);
  EXPECT_NEAR(std::abs(a.alpha - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(a.zeta(0)), 1.0, 1e-12);

  const double th = 0.7;
  const OperatorPair p(DenseMatrix::Identity(2, 2), diag({std::polar(1.0, th), 0.0}), SpaceDescriptor::lp(1));
  const CommonEigvec b = common_eigvec_p1(p, 2, 1e-9);
  ASSERT_TRUE(b.found);
  EXPECT_NEAR(std::abs(b.alpha - std::polar(1.0, th)), 0.0, 1e-12);
  const OperatorPair& nz = *b.normalized;
  EXPECT_LT((nz.s * b.zeta - b.zeta).norm(), 1e-12);
  EXPECT_LT((nz.t * b.zeta - b.zeta).norm(), 1e-12);

  const OperatorPair bad(DenseMatrix::Identity(2, 2), 0.5 * unit_matrix(2, 0, 1), SpaceDescriptor::lp(1));
  const CommonEigvec e = common_eigvec_p1(bad, 2, 1e-9);
  EXPECT_FALSE(e.found);
  EXPECT_LT(e.parallel_bound, 2.0);
}

TEST(Deflate, Examples) {
  const CanonicalForm c = canonical_form(real_l1_pair());
  const CommonEigvec ce = common_eigvec_p1(c.pair, c.unit_count, 1e-9);
  const DeflateResult d = deflate(*ce.normalized, ce.zeta, c.unit_count, DescentPath::L1, 1e-9);
  ASSERT_TRUE(d.pair.has_value());
  EXPECT_EQ(d.pair->n(), 1);
  EXPECT_NEAR(std::abs(d.pair->t(0, 0) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(d.pair->s(0, 0) + 1.0), 0.0, 1e-12);

  DenseVector e1 = DenseVector::Zero(3);
  e1(0) = 1.0;
  const OperatorPair p(diag({1.0, 1.0, 0.4}), diag({1.0, cplx(0, 1), 0.3}), SpaceDescriptor::lp(1));
  const DeflateResult d2 = deflate(p, e1, 2, DescentPath::L1, 1e-9);
  ASSERT_TRUE(d2.pair.has_value());
  EXPECT_LT((d2.pair->t - diag({1.0, 0.4})).norm(), 1e-14);
  EXPECT_LE(d2.identity_residual, 1e-12);

  // S e1 = e1 but the first row of S is not (1, 0): the column check fires.
  DenseMatrix s(2, 2);
  s << 1.0, 0.5, 0.0, 1.0;
  const DeflateResult bad = deflate(OperatorPair(DenseMatrix::Identity(2, 2), s, SpaceDescriptor::lp(1)),
                                    DenseVector::Unit(2, 0), 2, DescentPath::L1, 1e-9);
  EXPECT_TRUE(bad.violated);
  EXPECT_FALSE(bad.pair.has_value());
  EXPECT_NEAR(bad.first_column, std::sqrt(1.25), 1e-14);
}

TEST(Descent, PositiveControls) {
  const RefutationTrace b = descent_run(b12_pair());
  EXPECT_EQ(b.verdict, VerdictKind::IsometryCertified);
  EXPECT_LE(b.max_deviation, 1e-9);

  const RefutationTrace r = descent_run(real_l1_pair());
  EXPECT_EQ(r.verdict, VerdictKind::Inconclusive);
  EXPECT_EQ(r.reason, "density-step-inapplicable");
  EXPECT_LE(r.max_deviation, 1e-12);
  EXPECT_EQ(r.deflations(), 1);

  const RefutationTrace s = descent_run(b12_pair_as_stated());
  EXPECT_EQ(s.verdict, VerdictKind::Refuted);
  ASSERT_TRUE(s.fact.has_value());
  EXPECT_TRUE(check_terminal_fact(*s.fact, s.input.space).holds);
}

TEST(Descent, ComplexCandidatesRefuted) {
  std::mt19937_64 rng(91);
  for (Eigen::Index n : {4, 6}) {
    const int units = static_cast<int>(n) / 2 - 1;
    const OperatorPair p = l1_refutation_candidate(n, units, rng);
    EXPECT_NEAR(opnorm(p.t), 1.0, 1e-12);
    EXPECT_NEAR(opnorm(p.s), 1.0, 1e-12);
    for (bool verify : {true, false}) {
      DescentOptions opt;
      opt.verify_each_step = verify;
      const RefutationTrace tr = descent_run(p, opt);
      ASSERT_EQ(tr.verdict, VerdictKind::Refuted) << tr.reason;
      EXPECT_LE(tr.deflations() + 1, n + 1);
      ASSERT_TRUE(tr.fact.has_value());
      EXPECT_TRUE(check_terminal_fact(*tr.fact, p.space).holds);
      EXPECT_TRUE(replay_matches(tr));
      if (!verify) {
        // The structural run peels every unit entry, two per conjugate pair.
        EXPECT_EQ(tr.deflations(), 2 * units);
        EXPECT_EQ(tr.fact->kind, "norm_below_one");
      }
    }
  }
}

TEST(Descent, LpAboveTwoCases) {
  const auto l3 = SpaceDescriptor::lp(3);
  DescentOptions structural;
  structural.verify_each_step = false;
  // Case 2 then a terminal norm fact.
  const RefutationTrace a = descent_run(OperatorPair(diag({1.0, 0.5}), unit_matrix(2, 1, 1), l3), structural);
  EXPECT_EQ(a.verdict, VerdictKind::Refuted);
  EXPECT_EQ(a.deflations(), 1);
  EXPECT_EQ(a.fact->kind, "norm_below_one");
  EXPECT_TRUE(replay_matches(a));
  // zeta with S zeta != 0 goes to Case 1.
  DenseMatrix s(2, 2);
  s << 0.0, 0.0, 1.0, 0.0;
  const RefutationTrace b = descent_run(OperatorPair(unit_matrix(2, 0, 0) + 0.3 * unit_matrix(2, 1, 1), s, l3), structural);
  EXPECT_EQ(b.verdict, VerdictKind::Refuted);
  EXPECT_EQ(b.fact->kind, "case1");
  EXPECT_TRUE(check_terminal_fact(*b.fact, l3).holds);
  // Default mode refutes at verification.
  const RefutationTrace c = descent_run(OperatorPair(diag({1.0, 0.5}), unit_matrix(2, 1, 1), l3));
  EXPECT_EQ(c.verdict, VerdictKind::Refuted);
  EXPECT_EQ(c.fact->kind, "deviation");
}

TEST(Descent, Errors) {
  DescentOptions opt;
  opt.max_steps = 0;
  EXPECT_THROW(descent_run(real_l1_pair(), opt), std::invalid_argument);
  EXPECT_THROW(OperatorPair(DenseMatrix::Identity(2, 2), DenseMatrix::Identity(3, 3), SpaceDescriptor::lp(1)),
               std::invalid_argument);
}

TEST(AlphaGrid, Examples) {
  const AlphaGridReport a = alpha_grid_check(0.5, 3);
  EXPECT_DOUBLE_EQ(a.alpha, 0.1875);
  EXPECT_GE(a.min_scaled, 0.0);
  EXPECT_NEAR(alpha_grid_check(1, 4).alpha, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(f_direct(0.0, 0.5, 3, a.alpha), std::pow(0.5, 6), 1e-15);
  // Direct evaluation at moderate t agrees in sign with the scaled form.
  for (double t : {0.01, 0.1, 1.0, 3.0, 10.0}) EXPECT_GT(f_direct(t, 0.5, 3, a.alpha), 0.0);
  EXPECT_THROW(alpha_grid_check(0.0, 3), std::domain_error);
  EXPECT_THROW(alpha_grid_check(1.0, 2.0), std::domain_error);
}

TEST(AlphaGridProperty, RandomParameters) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> cu(1e-6, 2.0);
  std::uniform_real_distribution<double> pu(2.0 + 1e-9, 8.0);
  for (int i = 0; i < 100; ++i) EXPECT_NO_THROW(alpha_grid_check(cu(rng), pu(rng)));
}

TEST(Case1, Examples) {
  EXPECT_EQ(case1_contradiction(0.5, 3).t_star, 16.0);
  EXPECT_EQ(case1_contradiction(1, 4).t_star, 2.0);
  // Oracle: plain scalar scan over powers of two.
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> cu(0.05, 2.0);
  std::uniform_real_distribution<double> pu(2.1, 8.0);
  for (int i = 0; i < 50; ++i) {
    const double c = cu(rng);
    const double p = pu(rng);
    const Case1Witness w = case1_contradiction(c, p);
    const double alpha = p * c * c / (2 * (p - 1));
    double t = 1;
    while (!(2 + std::pow(t, -p) < alpha * std::pow(t, p - 2))) t *= 2;
    EXPECT_EQ(w.t_star, t);
    EXPECT_LT(w.lhs, w.rhs);
  }
}

TEST(DescentProperty, UnitaryConjugationInvariance) {
  std::mt19937_64 rng(8);
  for (const OperatorPair& p : corpus_like()) {
    const DenseMatrix u = random_unitary(p.n(), rng);
    const OperatorPair q(u.adjoint() * p.t * u, u.adjoint() * p.s * u, p.space);
    EXPECT_NEAR(isometry_deviation(q), isometry_deviation(p), 1e-10) << p.space.describe();
  }
}

TEST(DescentProperty, DoublingPreservesDeviation) {
  for (const OperatorPair& p : corpus_like())
    EXPECT_NEAR(isometry_deviation(selfadjoint_double(p)), isometry_deviation(p), 1e-10) << p.space.describe();
}

TEST(DescentProperty, DeflationPeelsOneUnitEntry) {
  DescentOptions structural;
  structural.verify_each_step = false;
  for (const OperatorPair& p : corpus_like()) {
    const RefutationTrace tr = descent_run(p, structural);
    Eigen::Index last_dim = -1;
    int last_units = -1;
    for (const TraceStep& s : tr.steps) {
      if (s.kind == StepKind::Canonicalize) {
        const int units = s.data.at("unit_count").get<int>();
        if (last_units >= 0) {
          EXPECT_EQ(units, last_units - 1);
          EXPECT_EQ(s.dimension, last_dim - 1);
        }
        last_units = units;
        last_dim = s.dimension;
      }
      if (s.kind == StepKind::Deflate) {
        EXPECT_EQ(s.data.at("from").get<Eigen::Index>(), s.dimension + 1);
      }
    }
  }
}
