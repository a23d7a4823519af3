#pragma once

#include <cstdint>
#include <vector>

#include "bellrand/core.hpp"

namespace bellrand {

/// splitmix64 finalizer applied to (seed, counter); the basis of all simulation draws.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter);

/// Uniform double in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t counter);

/// Non-cryptographic i.i.d. trial generator. Trial k depends only on
/// (seed, k), so any index range can be generated independently.
class TrialSimulator {
 public:
  /// Outcomes follow q's conditional table; settings follow `settings`.
  TrialSimulator(const JointDistribution& q, const SettingsDistribution& settings, std::uint64_t seed);

  TrialRecord trial(std::uint64_t index) const;
  std::vector<TrialRecord> range(std::uint64_t begin, std::uint64_t count) const;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::array<double, 4> settings_cdf_{};
  std::array<std::array<double, 4>, 4> outcome_cdf_{};
  std::uint64_t seed_;
};

std::vector<TrialRecord> simulate(const JointDistribution& q, const SettingsDistribution& settings,
                                  std::uint64_t n, std::uint64_t seed);

/// P(K / n > threshold_mean) for K ~ Binomial(n, 3/4): how often the all-'00'
/// local model beats a CHSH mean. Exact binomial tail.
double lr_exceedance_probability(std::uint64_t n, double threshold_mean);

/// The same probability by the normal approximation with continuity correction.
double lr_exceedance_normal(std::uint64_t n, double threshold_mean);

}  // namespace bellrand
