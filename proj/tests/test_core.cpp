#include <gtest/gtest.h>

#include <random>
#include <set>

#include "bellrand/core.hpp"
#include "test_support.hpp"

using namespace bellrand;

TEST(CellLayout, RowsAndColumnsFollowTheFixedOrder) {
  EXPECT_EQ(settings_row(0, 0), 0);
  EXPECT_EQ(settings_row(0, 1), 1);
  EXPECT_EQ(settings_row(1, 0), 2);
  EXPECT_EQ(settings_row(1, 1), 3);
  EXPECT_EQ(outcome_col(1, 1), 0);  // ++
  EXPECT_EQ(outcome_col(1, 0), 1);  // +0
  EXPECT_EQ(outcome_col(0, 1), 2);  // 0+
  EXPECT_EQ(outcome_col(0, 0), 3);  // 00
  for (int row = 0; row < 4; ++row) EXPECT_EQ(settings_row(setting_x(row), setting_y(row)), row);
  for (int col = 0; col < 4; ++col) EXPECT_EQ(outcome_col(outcome_a(col), outcome_b(col)), col);
}

TEST(Trials, SymbolsAndValidation) {
  EXPECT_EQ(outcome_symbol(1), '+');
  EXPECT_EQ(outcome_symbol(0), '0');
  EXPECT_EQ(parse_outcome_symbol('+'), 1);
  EXPECT_EQ(parse_outcome_symbol('0'), 0);
  EXPECT_THROW(parse_outcome_symbol('-'), InputError);
  EXPECT_THROW(validate_trial(TrialRecord{2, 0, 0, 0}, 7), InputError);
  try {
    validate_trial(TrialRecord{0, 0, 3, 0}, 42);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
  }
}

TEST(CountTable, TallyAndFrequencies) {
  std::vector<TrialRecord> trials = {{0, 0, 1, 1}, {0, 0, 0, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}, {1, 1, 0, 0}};
  const auto counts = CountTable::tally(trials);
  EXPECT_EQ(counts.total(), 5);
  EXPECT_EQ(counts(0, outcome_col(1, 1)), 1);
  EXPECT_EQ(counts(1, outcome_col(1, 0)), 1);
  const auto f = counts.conditional_frequencies();
  EXPECT_DOUBLE_EQ(f(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(f.row(3).sum(), 1.0);
}

TEST(CountTable, RejectsEmptySettingPairAndNegativeCounts) {
  CountArray c = CountArray::Ones();
  c.row(2).setZero();
  EXPECT_THROW(CountTable{c}, InputError);
  c = CountArray::Ones();
  c(1, 1) = -1;
  EXPECT_THROW(CountTable{c}, InputError);
}

TEST(Distributions, ValidationFlags) {
  CellArray uniform = CellArray::Constant(1.0 / 16);
  EXPECT_NO_THROW(JointDistribution{uniform});
  CellArray bad = uniform;
  bad(0, 0) += 1e-6;
  EXPECT_THROW(JointDistribution{bad}, DomainError);

  // Signaling but normalized with uniform settings.
  CellArray sig = CellArray::Zero();
  sig(0, outcome_col(1, 1)) = 0.25;
  sig(1, outcome_col(0, 0)) = 0.25;
  sig(2, outcome_col(0, 0)) = 0.25;
  sig(3, outcome_col(0, 0)) = 0.25;
  EXPECT_THROW(JointDistribution{sig}, DomainError);
  EXPECT_NO_THROW(JointDistribution(sig, {true, false}));
  EXPECT_FALSE(JointDistribution(sig, {true, false}).conditional().is_nonsignaling());

  CellArray skew = uniform;
  skew.row(0) *= 2.0;
  skew.row(1) *= 0.0;
  EXPECT_THROW(JointDistribution(skew, {true, false}), DomainError);
  EXPECT_NO_THROW(JointDistribution(skew, {false, false}));
}

TEST(Distributions, ConditionalRoundTrip) {
  std::mt19937_64 rng(11);
  const auto cond = fixtures::random_nonsignaling(rng);
  const auto joint = JointDistribution::from_conditional(cond);
  EXPECT_TRUE(joint.flags().nonsignaling);
  EXPECT_TRUE(joint.flags().uniform_settings);
  EXPECT_LT((joint.conditional().table() - cond.table()).abs().maxCoeff(), 1e-15);
}

TEST(SettingsDistribution, Admissibility) {
  Eigen::Array4d q(0.26, 0.24, 0.25, 0.25);
  SettingsDistribution s(q);
  EXPECT_TRUE(s.admissible(0.01));
  EXPECT_FALSE(s.admissible(0.005));
  EXPECT_THROW(SettingsDistribution(Eigen::Array4d(0.5, 0.5, 0.5, -0.5)), DomainError);
}

TEST(BellFunction, RequiresPositiveValuesAndAlphaRange) {
  EXPECT_THROW(BellFunction(CellArray::Zero(), 0.1, 0.0), DomainError);
  EXPECT_THROW(BellFunction(CellArray::Ones(), 0.1, 0.25), DomainError);
  const BellFunction t(CellArray::Ones() * 2.0, 0.1, 0.0);
  EXPECT_DOUBLE_EQ(t(TrialRecord{1, 1, 0, 0}), 2.0);
}

TEST(ExtremePoints, LocalPointsAreDistinctDeterministicAndNonsignaling) {
  const auto lr = deterministic_lr_points();
  ASSERT_EQ(lr.size(), 16u);
  std::set<std::vector<double>> seen;
  for (const auto& p : lr) {
    EXPECT_TRUE(p.is_nonsignaling(0.0));
    EXPECT_EQ((p.table() == 1.0).count(), 4);
    seen.insert(std::vector<double>(p.table().data(), p.table().data() + 16));
  }
  EXPECT_EQ(seen.size(), 16u);
}

TEST(ExtremePoints, LocalStrategyEncoding) {
  const auto s = local_strategy(0b1010);
  EXPECT_EQ(s.a[0], 1);
  EXPECT_EQ(s.a[1], 0);
  EXPECT_EQ(s.b[0], 1);
  EXPECT_EQ(s.b[1], 0);
  const auto p = deterministic_lr_points()[0b1010];
  EXPECT_EQ(p(settings_row(0, 0), outcome_col(1, 1)), 1.0);
  EXPECT_EQ(p(settings_row(1, 1), outcome_col(0, 0)), 1.0);
}

TEST(ExtremePoints, PrBoxesReachTheMaximalChshValue) {
  const auto boxes = pr_boxes();
  ASSERT_EQ(boxes.size(), 8u);
  const auto uniform = SettingsDistribution::uniform().probabilities();
  for (int i = 0; i < 8; ++i) {
    EXPECT_TRUE(boxes[i].is_nonsignaling(0.0));
    const auto ind = chsh_indicator(pr_orientation(i));
    EXPECT_DOUBLE_EQ(expectation(boxes[i].table(), ind, uniform), 1.0);
    // Every local point scores at most 3/4 on every orientation.
    for (const auto& lr : deterministic_lr_points()) {
      EXPECT_LE(expectation(lr.table(), ind, uniform), 0.75 + 1e-15);
    }
  }
  // The canonical box: a XOR b = x AND y.
  const auto& pr = boxes[0];
  EXPECT_DOUBLE_EQ(pr(settings_row(1, 1), outcome_col(1, 0)), 0.5);
  EXPECT_DOUBLE_EQ(pr(settings_row(1, 1), outcome_col(1, 1)), 0.0);
  EXPECT_EQ(nonsignaling_extreme_points().size(), 24u);
}
