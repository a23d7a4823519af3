#include <gtest/gtest.h>

#include <Eigen/QR>

#include <random>

#include "bellrand/pbr.hpp"
#include "bellrand/polytope.hpp"
#include "test_support.hpp"

using namespace bellrand;

namespace {

JointDistribution projected_fit() { return ml_nonsignaling_projection(fixtures::published_fit()).distribution; }

// max over the 24 vertices of E(T) - 1, uniform settings, computed cell by cell.
double brute_force_m(const CellArray& t) {
  double best = -1e300;
  for (const auto& v : nonsignaling_extreme_points()) {
    double e = 0.0;
    for (int row = 0; row < 4; ++row) {
      for (int col = 0; col < 4; ++col) e += 0.25 * v(row, col) * t(row, col);
    }
    best = std::max(best, e - 1.0);
  }
  return best;
}

}  // namespace

TEST(ExtremalSettings, CountAndBounds) {
  EXPECT_EQ(extremal_settings(0.0).size(), 1u);
  const auto s = extremal_settings(1e-3);
  EXPECT_EQ(s.size(), 6u);
  for (const auto& q : s) {
    EXPECT_TRUE(q.admissible(1e-3));
    EXPECT_NEAR(q.probabilities().sum(), 1.0, 1e-15);
  }
  EXPECT_THROW(extremal_settings(0.25), DomainError);
}

TEST(ComputeM, MatchesBruteForceOverTheVertices) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (int rep = 0; rep < 200; ++rep) {
    CellArray t = CellArray::NullaryExpr([&] { return u(rng); });
    const double m = brute_force_m(t);
    if (m > 0.0) {
      EXPECT_NEAR(compute_m(t, 0.0), m, 1e-15);
    } else {
      EXPECT_THROW(compute_m(t, 0.0), DomainError);
    }
  }
}

TEST(ComputeM, PublishedBellFunction) {
  const auto t = fixtures::published_bell_function();
  EXPECT_NEAR(compute_m(t.values(), 0.0), 0.0100425, 5e-8);
  EXPECT_LE(lr_excess(t.values(), 0.0), 1e-10);
  EXPECT_THROW(compute_m(CellArray::Ones(), 0.0), DomainError);
}

TEST(ComputeM, SettingsBiasOnlyIncreasesTheExcess) {
  const auto t = fixtures::published_bell_function().values();
  double prev = compute_m(t, 0.0);
  for (double alpha : {1e-5, 1e-4, 1e-3, 1e-2}) {
    const double m = compute_m(t, alpha);
    EXPECT_GE(m, prev);
    prev = m;
  }
}

TEST(Optimizer, DataSetFiveProjection) {
  const auto q = projected_fit();
  const auto r = optimize_bell_function(q, 0.0);
  ASSERT_TRUE(r.violation);
  const auto& t = r.function.values();
  for (int row = 0; row < 4; ++row) EXPECT_EQ(t(row, outcome_col(0, 0)), 1.0);
  EXPECT_LE(lr_excess(t, 0.0), 0.0);
  EXPECT_NEAR(r.function.m(), brute_force_m(t), 1e-15);
  EXPECT_NEAR(expectation(q.table(), t), 1.000003931, 1e-8);
  EXPECT_GT(r.objective, 0.0);
  // Rounding down at the tenth decimal.
  EXPECT_LE((r.raw_values - t).maxCoeff(), 1e-9);
  EXPECT_GE((r.raw_values - t).minCoeff(), 0.0);
  // The published function cannot beat the optimum on the same Q.
  double published = 0.0;
  const auto tp = fixtures::published_bell_function().values();
  for (int row = 0; row < 4; ++row)
    for (int col = 0; col < 4; ++col) published += q(row, col) * std::log(tp(row, col));
  EXPECT_LE(published, r.raw_objective + 1e-15);
  EXPECT_NEAR(asymptotic_rate(r.function, q), 1.42e-4, 0.02e-4);
}

TEST(Optimizer, RawOptimumSatisfiesKktWithNonnegativeMultipliers) {
  const auto q = projected_fit();
  const auto r = optimize_bell_function(q, 0.0);
  const auto lr = deterministic_lr_points();
  std::vector<int> active;
  for (int k = 0; k < 16; ++k) {
    if (expectation(lr[k].table(), r.raw_values, Eigen::Array4d::Constant(0.25).eval()) - 1.0 > -1e-7) {
      active.push_back(k);
    }
  }
  ASSERT_FALSE(active.empty());
  // Stationarity on the 12 free cells: Q(c) / T(c) = sum_k mu_k * 1/4 * P_k(c).
  Eigen::MatrixXd g(12, active.size());
  Eigen::VectorXd rhs(12);
  int i = 0;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 3; ++col, ++i) {
      rhs[i] = q(row, col) / r.raw_values(row, col);
      for (std::size_t j = 0; j < active.size(); ++j) g(i, j) = 0.25 * lr[active[j]](row, col);
    }
  }
  const Eigen::VectorXd mu = g.colPivHouseholderQr().solve(rhs);
  EXPECT_LT((g * mu - rhs).norm() / rhs.norm(), 1e-6);
  EXPECT_GT(mu.minCoeff(), -1e-6 * mu.maxCoeff());
}

TEST(Optimizer, LocalDistributionsShowNoViolation) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    const auto q = JointDistribution::from_conditional(fixtures::random_local(rng));
    const auto r = optimize_bell_function(q, 0.0);
    EXPECT_FALSE(r.violation) << rep;
    EXPECT_LE(r.objective, 1e-9);
  }
}

TEST(Optimizer, PrBoxGainsTheMost) {
  const auto pr = JointDistribution::from_conditional(pr_boxes()[0]);
  const auto r = optimize_bell_function(pr, 0.0);
  EXPECT_TRUE(r.violation);
  EXPECT_GT(r.objective, 0.1);
}

TEST(Optimizer, SettingsBiasLowersTheGain) {
  const auto q = projected_fit();
  double prev = optimize_bell_function(q, 0.0).objective;
  for (double alpha : {1e-5, 1e-4, 1e-3}) {
    const auto r = optimize_bell_function(q, alpha);
    EXPECT_LE(r.objective, prev + 1e-15);
    EXPECT_LE(lr_excess(r.function.values(), alpha), 0.0);
    prev = r.objective;
  }
}

TEST(Optimizer, RequiresNonsignalingUniformQ) {
  EXPECT_THROW(optimize_bell_function(fixtures::published_fit(), 0.0), DomainError);
}
