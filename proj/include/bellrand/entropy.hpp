#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

#include "bellrand/compensated_sum.hpp"
#include "bellrand/core.hpp"

namespace bellrand {

/// Band around ln(v_thresh) inside which a result is flagged as marginal.
inline constexpr double kThresholdGuardBand = 1e-9;

/// Outcome of the entropy-production phase. All products are in log form.
struct EntropyRun {
  std::uint64_t n = 0;
  double log_v = 0.0;
  double log_v_thresh = 0.0;
  /// 1-based trial number at which the running product first exceeded v_thresh.
  std::optional<std::uint64_t> crossing_index;
  /// False when chunks were merged before the crossing could be located.
  bool crossing_known = true;
  bool frozen = false;
  bool passed = false;    // log_v >= ln(v_thresh)
  bool marginal = false;  // |log_v - ln(v_thresh)| <= guard band
};

/// Streams trials into the martingale log-product.
///
/// With `adaptive` set, every trial after the first crossing contributes
/// T_i = 1, which is what relabeling all later outcomes to '0' achieves.
class EntropyAccumulator {
 public:
  EntropyAccumulator(const BellFunction& t, double log_v_thresh, bool adaptive);

  void add(const TrialRecord& trial);
  void add(std::span<const TrialRecord> trials);

  /// Appends an accumulator that consumed the trials immediately following
  /// this one's. Only valid without adaptive freezing.
  void merge(const EntropyAccumulator& later);

  std::uint64_t trials() const noexcept { return n_; }
  double log_v() const { return log_v_.value(); }
  EntropyRun result() const;

 private:
  std::array<double, 16> log_t_{};
  double log_v_thresh_;
  bool adaptive_;
  std::uint64_t n_ = 0;
  CompensatedSum<double> log_v_;
  std::optional<std::uint64_t> crossing_;
  bool crossing_known_ = true;
};

EntropyRun accumulate(std::span<const TrialRecord> trials, const BellFunction& t, double log_v_thresh,
                      bool adaptive);

/// Largest ln(v_thresh) the entropy theorem admits: n ln(1 + 3m/2) - ln(eps_p).
double max_log_v_thresh(std::uint64_t n, double eps_p, double m);

/// -log2(delta) with delta = [1 + (1 - (eps_p v_thresh)^(1/n)) / (2m)]^n,
/// evaluated in the log domain. Throws DomainError naming a violated bound.
double delta_log2(std::uint64_t n, double eps_p, double log_v_thresh, double m);

/// Per-trial bound 1 + (1 - E(T)_P) / (2m) on max P(ab|xy).
double lemma_prob_bound(const JointDistribution& p, const BellFunction& t);

}  // namespace bellrand
