#include "bellrand/entropy.hpp"

#include <cmath>
#include <string>

namespace bellrand {

EntropyAccumulator::EntropyAccumulator(const BellFunction& t, double log_v_thresh, bool adaptive)
    : log_v_thresh_(log_v_thresh), adaptive_(adaptive) {
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) log_t_[4 * row + col] = std::log(t(row, col));
  }
}

void EntropyAccumulator::add(const TrialRecord& trial) {
  validate_trial(trial, n_);
  ++n_;
  if (adaptive_ && crossing_) return;
  log_v_ += log_t_[4 * trial.row() + trial.col()];
  if (!crossing_ && crossing_known_ && log_v_.value() > log_v_thresh_) crossing_ = n_;
}

void EntropyAccumulator::add(std::span<const TrialRecord> trials) {
  for (const auto& trial : trials) add(trial);
}

void EntropyAccumulator::merge(const EntropyAccumulator& later) {
  if (adaptive_ || later.adaptive_) {
    throw InputError("adaptive accumulation is sequential and cannot be merged");
  }
  if (!crossing_) crossing_known_ = false;
  n_ += later.n_;
  log_v_ += later.log_v_;
}

EntropyRun EntropyAccumulator::result() const {
  EntropyRun run;
  run.n = n_;
  run.log_v = log_v_.value();
  run.log_v_thresh = log_v_thresh_;
  run.crossing_index = crossing_;
  run.crossing_known = crossing_known_;
  run.frozen = adaptive_ && crossing_.has_value();
  run.passed = run.log_v >= log_v_thresh_;
  run.marginal = std::abs(run.log_v - log_v_thresh_) <= kThresholdGuardBand;
  return run;
}

EntropyRun accumulate(std::span<const TrialRecord> trials, const BellFunction& t, double log_v_thresh,
                      bool adaptive) {
  EntropyAccumulator acc(t, log_v_thresh, adaptive);
  acc.add(trials);
  return acc.result();
}

double max_log_v_thresh(std::uint64_t n, double eps_p, double m) {
  return static_cast<double>(n) * std::log1p(1.5 * m) - std::log(eps_p);
}

double delta_log2(std::uint64_t n, double eps_p, double log_v_thresh, double m) {
  if (n == 0) throw DomainError("delta needs at least one trial");
  if (!(eps_p > 0.0 && eps_p < 1.0)) throw DomainError("eps_p must lie in (0, 1)");
  if (!(m > 0.0)) throw DomainError("m must be positive");
  if (!(log_v_thresh >= 0.0)) throw DomainError("v_thresh below its lower bound 1");
  const double upper = max_log_v_thresh(n, eps_p, m);
  if (!(log_v_thresh <= upper)) {
    throw DomainError("v_thresh above its upper bound (1 + 3m/2)^n / eps_p");
  }
  const double nn = static_cast<double>(n);
  const double root_log = (std::log(eps_p) + log_v_thresh) / nn;
  const double u = -std::expm1(root_log);
  return -nn * std::log1p(u / (2.0 * m)) / std::log(2.0);
}

double lemma_prob_bound(const JointDistribution& p, const BellFunction& t) {
  if (!(t.m() > 0.0)) throw DomainError("lemma bound needs m > 0");
  return 1.0 + (1.0 - expectation(p.table(), t.values())) / (2.0 * t.m());
}

}  // namespace bellrand
