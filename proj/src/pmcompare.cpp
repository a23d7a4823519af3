#include "bellrand/pmcompare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bellrand/errors.hpp"

namespace bellrand {

PrWeight pr_weight_detail(const JointDistribution& q) {
  if (!q.flags().uniform_settings) {
    throw DomainError("PR weight needs uniform settings");
  }
  PrWeight best;
  best.chsh_expectation = -1.0;
  for (int i = 0; i < 8; ++i) {
    const double e = expectation(q.table(), chsh_indicator(pr_orientation(i)));
    if (e > best.chsh_expectation) {
      best.chsh_expectation = e;
      best.orientation = i;
    }
  }
  best.p = std::clamp(4.0 * (best.chsh_expectation - 0.75), 0.0, 1.0);
  return best;
}

double pm_min_trials(double p, double eps) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("PR weight must lie in [0, 1]");
  if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("eps must lie in (0, 1]");
  if (p == 0.0) return std::numeric_limits<double>::infinity();
  return 8.0 * std::log(1.0 / eps) / (p * p);
}

}  // namespace bellrand
