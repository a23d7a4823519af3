#pragma once

#include <cstdint>

namespace bellrand {

/// Largest t >= 1 with t + 4 log2 t <= neg_log2_delta + log2 kappa + 5 log2 eps_ext - 11,
/// or 0 if none qualifies.
std::uint64_t max_extractable_bits(double neg_log2_delta, double kappa, double eps_ext);

/// Largest t >= 1 with t + 4 log2 t <= budget, or 0.
std::uint64_t max_bits_for_budget(double budget);

struct ErrorSplit {
  double eps_p;
  double kappa;
  double eps_ext;
};

/// eps_p = (0.95 eps_fin)^2, kappa = 0.95 eps_fin, eps_ext = 0.05 eps_fin.
ErrorSplit error_split(double eps_fin);

struct FinalErrors {
  double eps_fin;         // max(eps_p / kappa + eps_ext, kappa)
  double ideal_distance;  // max(eps_p + eps_ext, kappa)
};

FinalErrors final_errors(double eps_p, double kappa, double eps_ext);

/// eps_p / pass_prob + eps_ext.
double soundness_rhs_bound(double eps_p, double pass_prob, double eps_ext);

/// Extractor min-entropy parameter: neg_log2_delta + log2 kappa + log2 eps_ext - 1.
double extractor_sigma(double neg_log2_delta, double kappa, double eps_ext);

/// Per-construction extractor error: eps_ext / 2.
inline double extractor_epsilon(double eps_ext) { return eps_ext / 2.0; }

/// Whether t satisfies the extractor's own bound t + 4 log2 t <= sigma - 6 + 4 log2 eps.
bool extractor_admits(std::uint64_t t, double sigma, double eps);

struct ProtocolParams {
  std::uint64_t n = 0;
  double log_v_thresh = 0.0;  // ln v_thresh
  double eps_p = 0.0;
  double eps_ext = 0.0;
  double kappa = 0.0;
  double m = 0.0;
  std::uint64_t t = 0;
  double neg_log2_delta = 0.0;
  double sigma = 0.0;
  double eps_1bit = 0.0;
  std::uint64_t q = 0;  // extractor input length 2n
  std::uint64_t d = 0;  // seed length
};

/// Fills the derived entries (delta, t, sigma, eps_1bit, q) from the declared
/// ones; t = max_extractable_bits unless `requested_t` is nonzero, in which
/// case it must be admissible. Seed length is left to the extractor.
ProtocolParams derive_protocol_params(std::uint64_t n, double log_v_thresh, double eps_p,
                                      double kappa, double eps_ext, double m,
                                      std::uint64_t requested_t = 0);

}  // namespace bellrand
