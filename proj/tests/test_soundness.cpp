#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bellrand/entropy.hpp"
#include "bellrand/soundness.hpp"

using namespace bellrand;

namespace {

std::uint64_t linear_scan(double budget) {
  std::uint64_t best = 0;
  for (std::uint64_t t = 1; t < 100'000; ++t) {
    if (static_cast<double>(t) + 4.0 * std::log2(static_cast<double>(t)) <= budget) best = t;
  }
  return best;
}

}  // namespace

TEST(MaxBits, BisectionAgreesWithLinearScan) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 5000.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double budget = u(rng);
    EXPECT_EQ(max_bits_for_budget(budget), linear_scan(budget)) << budget;
  }
  EXPECT_EQ(max_bits_for_budget(0.5), 0u);
  EXPECT_EQ(max_bits_for_budget(1.0), 1u);
  EXPECT_EQ(max_bits_for_budget(6.0), 2u);   // 2 + 4 = 6
  EXPECT_EQ(max_bits_for_budget(5.99), 1u);
}

TEST(MaxBits, ExtractorAdmitsExactlyTheCertifiedLength) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    const double nld = 50.0 + 3000.0 * u(rng);
    const double eps_fin = std::pow(10.0, -12.0 + 11.0 * u(rng));
    const auto split = error_split(eps_fin);
    const auto t = max_extractable_bits(nld, split.kappa, split.eps_ext);
    const double sigma = extractor_sigma(nld, split.kappa, split.eps_ext);
    const double eps = extractor_epsilon(split.eps_ext);
    EXPECT_TRUE(extractor_admits(t, sigma, eps));
    EXPECT_FALSE(extractor_admits(t + 1, sigma, eps));
  }
}

TEST(ErrorSplit, RecoversTheFinalError) {
  for (double eps_fin : {1e-12, 1e-6, 0.01, 0.5}) {
    const auto s = error_split(eps_fin);
    EXPECT_DOUBLE_EQ(s.kappa, 0.95 * eps_fin);
    EXPECT_DOUBLE_EQ(s.eps_p, s.kappa * s.kappa);
    EXPECT_DOUBLE_EQ(s.eps_ext, 0.05 * eps_fin);
    const auto f = final_errors(s.eps_p, s.kappa, s.eps_ext);
    EXPECT_NEAR(f.eps_fin, eps_fin, 1e-15 * eps_fin);
    EXPECT_LE(f.ideal_distance, f.eps_fin);
  }
  EXPECT_THROW(error_split(1.0), DomainError);
  EXPECT_THROW(error_split(0.0), DomainError);
}

TEST(Soundness, RhsBound) {
  EXPECT_DOUBLE_EQ(soundness_rhs_bound(1e-6, 1e-3, 1e-7), 1e-3 + 1e-7);
  EXPECT_THROW(soundness_rhs_bound(1e-6, 0.0, 1e-7), DomainError);
}

TEST(Params, DataSetFive) {
  const double log_v = std::log(1.5e32);
  const auto p = derive_protocol_params(55'110'210, log_v, 9.025e-25, 9.5e-13, 5e-14, 0.0100425, 1024);
  EXPECT_EQ(p.t, 1024u);
  EXPECT_EQ(p.q, 110'220'420u);
  EXPECT_DOUBLE_EQ(p.eps_1bit, 2.5e-14);
  const auto free = derive_protocol_params(55'110'210, log_v, 9.025e-25, 9.5e-13, 5e-14, 0.0100425);
  EXPECT_GE(free.t, 1024u);
  EXPECT_THROW(derive_protocol_params(55'110'210, log_v, 9.025e-25, 9.5e-13, 5e-14, 0.0100425, free.t + 1),
               DomainError);
}

TEST(Params, NoBitsAtTinyDelta) {
  const auto p = derive_protocol_params(1000, 1.0, 1e-6, 1e-3, 1e-4, 0.01);
  EXPECT_EQ(p.t, 0u);
}
