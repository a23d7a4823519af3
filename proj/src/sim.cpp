#include "bellrand/sim.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <numbers>

#include "bellrand/errors.hpp"

namespace bellrand {

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  // Second round decorrelates neighbouring seeds.
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
  return static_cast<double>(counter_hash(seed, counter) >> 11) * 0x1.0p-53;
}

namespace {

template <typename Row>
std::array<double, 4> cumulative(const Row& row) {
  std::array<double, 4> cdf{};
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    acc += row[i];
    cdf[i] = acc;
  }
  return cdf;
}

int sample(const std::array<double, 4>& cdf, double u) {
  // Draws above a total that rounds below 1 land in the last positive cell.
  int last = 0;
  for (int i = 0; i < 4; ++i) {
    if (u < cdf[i]) return i;
    if (cdf[i] > (i == 0 ? 0.0 : cdf[i - 1])) last = i;
  }
  return last;
}

}  // namespace

TrialSimulator::TrialSimulator(const JointDistribution& q, const SettingsDistribution& settings,
                               std::uint64_t seed)
    : seed_(seed) {
  const Eigen::Array4d s = settings.probabilities();
  settings_cdf_ = cumulative(s);
  const CellArray cond = q.conditional().table();
  for (int row = 0; row < 4; ++row) {
    const Eigen::Array4d r = cond.row(row).transpose();
    outcome_cdf_[row] = cumulative(r);
  }
}

TrialRecord TrialSimulator::trial(std::uint64_t index) const {
  const int row = sample(settings_cdf_, counter_uniform(seed_, 2 * index));
  const int col = sample(outcome_cdf_[row], counter_uniform(seed_, 2 * index + 1));
  TrialRecord t;
  t.x = static_cast<std::uint8_t>(setting_x(row));
  t.y = static_cast<std::uint8_t>(setting_y(row));
  t.a = static_cast<std::uint8_t>(outcome_a(col));
  t.b = static_cast<std::uint8_t>(outcome_b(col));
  return t;
}

std::vector<TrialRecord> TrialSimulator::range(std::uint64_t begin, std::uint64_t count) const {
  std::vector<TrialRecord> out;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) out.push_back(trial(begin + k));
  return out;
}

std::vector<TrialRecord> simulate(const JointDistribution& q, const SettingsDistribution& settings,
                                  std::uint64_t n, std::uint64_t seed) {
  return TrialSimulator(q, settings, seed).range(0, n);
}

namespace {

void check_exceedance_args(std::uint64_t n, double threshold_mean) {
  if (n == 0) throw DomainError("exceedance needs n >= 1");
  if (!(threshold_mean > 0.0 && threshold_mean < 1.0)) throw DomainError("threshold mean must lie in (0, 1)");
}

}  // namespace

double lr_exceedance_probability(std::uint64_t n, double threshold_mean) {
  check_exceedance_args(n, threshold_mean);
  const double nd = static_cast<double>(n);
  // Smallest K with K / n > threshold.
  double k_min = std::floor(nd * threshold_mean) + 1.0;
  if ((k_min - 1.0) / nd > threshold_mean) k_min -= 1.0;
  if (k_min > nd) return 0.0;
  if (k_min <= 0.0) return 1.0;
  const boost::math::binomial_distribution<double> dist(nd, 0.75);
  return boost::math::cdf(boost::math::complement(dist, k_min - 1.0));
}

double lr_exceedance_normal(std::uint64_t n, double threshold_mean) {
  check_exceedance_args(n, threshold_mean);
  const double nd = static_cast<double>(n);
  const double k_min = std::floor(nd * threshold_mean) + 1.0;
  const double z = (k_min - 0.5 - 0.75 * nd) / std::sqrt(nd * 0.75 * 0.25);
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

}  // namespace bellrand
