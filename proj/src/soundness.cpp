#include "bellrand/soundness.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bellrand/entropy.hpp"
#include "bellrand/errors.hpp"

namespace bellrand {

namespace {

void require_unit_interval(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) throw DomainError(std::string(name) + " must lie in (0, 1)");
}

bool fits(std::uint64_t t, double budget) {
  const double td = static_cast<double>(t);
  return td + 4.0 * std::log2(td) <= budget;
}

}  // namespace

std::uint64_t max_bits_for_budget(double budget) {
  if (!(budget >= 1.0)) return 0;
  // t + 4 log2 t is increasing; bisect on [1, budget].
  std::uint64_t lo = 1;
  std::uint64_t hi = static_cast<std::uint64_t>(std::min(budget, 9.0e18)) + 1;
  if (!fits(lo, budget)) return 0;
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (fits(mid, budget)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::uint64_t max_extractable_bits(double neg_log2_delta, double kappa, double eps_ext) {
  return max_bits_for_budget(neg_log2_delta + std::log2(kappa) + 5.0 * std::log2(eps_ext) - 11.0);
}

ErrorSplit error_split(double eps_fin) {
  require_unit_interval(eps_fin, "eps_fin");
  const double kappa = 0.95 * eps_fin;
  return {kappa * kappa, kappa, 0.05 * eps_fin};
}

FinalErrors final_errors(double eps_p, double kappa, double eps_ext) {
  require_unit_interval(eps_p, "eps_p");
  require_unit_interval(kappa, "kappa");
  require_unit_interval(eps_ext, "eps_ext");
  return {std::max(eps_p / kappa + eps_ext, kappa), std::max(eps_p + eps_ext, kappa)};
}

double soundness_rhs_bound(double eps_p, double pass_prob, double eps_ext) {
  if (!(pass_prob > 0.0)) throw DomainError("pass probability must be positive");
  return eps_p / pass_prob + eps_ext;
}

double extractor_sigma(double neg_log2_delta, double kappa, double eps_ext) {
  return neg_log2_delta + std::log2(kappa) + std::log2(eps_ext) - 1.0;
}

bool extractor_admits(std::uint64_t t, double sigma, double eps) {
  if (t == 0) return true;
  return fits(t, sigma - 6.0 + 4.0 * std::log2(eps));
}

ProtocolParams derive_protocol_params(std::uint64_t n, double log_v_thresh, double eps_p, double kappa,
                                      double eps_ext, double m, std::uint64_t requested_t) {
  require_unit_interval(eps_p, "eps_p");
  require_unit_interval(kappa, "kappa");
  require_unit_interval(eps_ext, "eps_ext");
  ProtocolParams p;
  p.n = n;
  p.log_v_thresh = log_v_thresh;
  p.eps_p = eps_p;
  p.eps_ext = eps_ext;
  p.kappa = kappa;
  p.m = m;
  p.neg_log2_delta = delta_log2(n, eps_p, log_v_thresh, m);
  const std::uint64_t t_max = max_extractable_bits(p.neg_log2_delta, kappa, eps_ext);
  if (requested_t != 0 && requested_t > t_max) {
    throw DomainError("requested output length " + std::to_string(requested_t) +
                      " exceeds the admissible " + std::to_string(t_max));
  }
  p.t = requested_t != 0 ? requested_t : t_max;
  p.sigma = extractor_sigma(p.neg_log2_delta, kappa, eps_ext);
  p.eps_1bit = extractor_epsilon(eps_ext);
  p.q = 2 * n;
  return p;
}

}  // namespace bellrand
