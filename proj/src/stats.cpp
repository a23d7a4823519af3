#include "bellrand/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bellrand/compensated_sum.hpp"
#include "bellrand/errors.hpp"

namespace bellrand {

ThresholdChoice choose_threshold(const JointDistribution& q, const BellFunction& t, std::uint64_t n,
                                 double quantile_z) {
  if (n == 0) throw DomainError("threshold needs n >= 1");
  const CellArray log_t = t.values().log();
  const double mu = expectation(q.table(), log_t);
  const double second = expectation(q.table(), log_t.square());
  const double sigma = std::sqrt(std::max(0.0, second - mu * mu));
  const double nd = static_cast<double>(n);
  ThresholdChoice out;
  out.mu = mu;
  out.sigma = sigma;
  out.log_v_thresh = nd * mu - quantile_z * std::sqrt(nd) * sigma;
  out.no_expected_violation = mu <= 0.0;
  return out;
}

double pooled_two_proportion_z(double k1, double n1, double k2, double n2) {
  if (!(n1 > 0.0 && n2 > 0.0)) throw InputError("two-proportion test needs populated samples");
  const double pooled = (k1 + k2) / (n1 + n2);
  const double var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
  if (!(var > 0.0)) return 0.0;
  return (k1 / n1 - k2 / n2) / std::sqrt(var);
}

double two_tailed_normal_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

std::array<SignalingTest, 4> signaling_tests(const CountTable& counts) {
  const CountArray& c = counts.counts();
  auto total = [&](int row) { return static_cast<double>(c.row(row).sum()); };
  // Columns ++, +0 carry A = +; columns ++, 0+ carry B = +.
  auto alice_plus = [&](int row) { return static_cast<double>(c(row, 0) + c(row, 1)); };
  auto bob_plus = [&](int row) { return static_cast<double>(c(row, 0) + c(row, 2)); };
  auto test = [](double z) { return SignalingTest{z, two_tailed_normal_p(z)}; };

  std::array<SignalingTest, 4> out;
  for (int x = 0; x < 2; ++x) {
    const int r0 = settings_row(x, 0);
    const int r1 = settings_row(x, 1);
    out[x] = test(pooled_two_proportion_z(alice_plus(r0), total(r0), alice_plus(r1), total(r1)));
  }
  for (int y = 0; y < 2; ++y) {
    const int r0 = settings_row(0, y);
    const int r1 = settings_row(1, y);
    out[2 + y] = test(pooled_two_proportion_z(bob_plus(r0), total(r0), bob_plus(r1), total(r1)));
  }
  return out;
}

double tv_distance(std::span<const double> p1, std::span<const double> p2) {
  if (p1.size() != p2.size() || p1.empty()) throw InputError("distributions have mismatched supports");
  CompensatedSum<double> s1;
  CompensatedSum<double> s2;
  CompensatedSum<double> diff;
  for (std::size_t i = 0; i < p1.size(); ++i) {
    if (p1[i] < 0.0 || p2[i] < 0.0) throw InputError("negative probability");
    s1 += p1[i];
    s2 += p2[i];
    diff += std::abs(p1[i] - p2[i]);
  }
  if (std::abs(s1.value() - 1.0) > kNormalizationTol || std::abs(s2.value() - 1.0) > kNormalizationTol) {
    throw InputError("distribution is not normalized");
  }
  return 0.5 * diff.value();
}

}  // namespace bellrand
