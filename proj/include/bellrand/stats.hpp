#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "bellrand/core.hpp"

namespace bellrand {

inline constexpr double kDefaultThresholdQuantile = 1.645;

struct ThresholdChoice {
  double log_v_thresh = 0.0;  // n mu - z sqrt(n) s
  double mu = 0.0;            // E(ln T)_Q
  double sigma = 0.0;         // sqrt(Var(ln T)_Q)
  bool no_expected_violation = false;  // mu <= 0
};

/// Threshold exceeded with probability about Phi(z) by n i.i.d. trials from Q.
ThresholdChoice choose_threshold(const JointDistribution& q, const BellFunction& t, std::uint64_t n,
                                 double quantile_z = kDefaultThresholdQuantile);

struct SignalingTest {
  double z = 0.0;
  double p_value = 1.0;  // two-tailed
};

/// Pooled two-proportion z-tests of the four no-signaling equalities:
/// P(A=+|x=0) and P(A=+|x=1) across y, then P(B=+|y=0) and P(B=+|y=1) across x.
std::array<SignalingTest, 4> signaling_tests(const CountTable& counts);

/// z for H0: p1 = p2 given k1 successes of n1 and k2 of n2, with the pooled
/// variance; 0 when the pooled proportion is 0 or 1.
double pooled_two_proportion_z(double k1, double n1, double k2, double n2);

/// erfc(|z| / sqrt 2).
double two_tailed_normal_p(double z);

/// Half the l1 distance; both inputs must be normalized over the same outcomes.
double tv_distance(std::span<const double> p1, std::span<const double> p2);

}  // namespace bellrand
