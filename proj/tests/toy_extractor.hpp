#pragma once
// Exhaustive total-variation check of the extractor at q = 8, t = 2, w = 17
// (field degree 8, a single input block).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "bellrand/extractor.hpp"

namespace bellrand::fixtures {

inline constexpr std::uint64_t kToyQ = 8;
inline constexpr std::uint64_t kToyT = 2;
inline constexpr std::uint64_t kToyW = 17;
inline constexpr double kToyEps = 0.75;  // any eps that selects w = 17 works

/// Source uniform on `support` distinct bytes: min-entropy log2(support).
inline std::vector<std::uint8_t> random_flat_source(std::mt19937_64& rng, unsigned support) {
  std::vector<std::uint8_t> all(256);
  for (unsigned i = 0; i < 256; ++i) all[i] = static_cast<std::uint8_t>(i);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(support);
  return all;
}

/// Distance of (seed, Ext(X, seed)) from (seed, U_2), exhaustive over every
/// seed bit the output depends on. With one input block the evaluation point
/// drops out and output bit i is <x, r_i>, where r_i is the inner-product
/// segment of sub-seed i; the two sub-seeds are disjoint.
inline double toy_tv_distance(const std::vector<std::uint8_t>& source) {
  const double n = static_cast<double>(source.size());
  std::array<std::uint64_t, 256> mask{};  // bit j: parity(source[j] & r)
  for (unsigned r = 0; r < 256; ++r) {
    for (std::size_t j = 0; j < source.size(); ++j) {
      if (std::popcount(static_cast<unsigned>(source[j] & r)) & 1) mask[r] |= std::uint64_t{1} << j;
    }
  }
  const std::uint64_t all = source.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << source.size()) - 1;
  double total = 0.0;
  for (unsigned r0 = 0; r0 < 256; ++r0) {
    for (unsigned r1 = 0; r1 < 256; ++r1) {
      const std::uint64_t m0 = mask[r0];
      const std::uint64_t m1 = mask[r1];
      const int c11 = std::popcount(m0 & m1);
      const int c10 = std::popcount(m0 & ~m1 & all);
      const int c01 = std::popcount(~m0 & m1 & all);
      const int c00 = static_cast<int>(source.size()) - c11 - c10 - c01;
      total += 0.5 * (std::abs(c11 / n - 0.25) + std::abs(c10 / n - 0.25) + std::abs(c01 / n - 0.25) +
                      std::abs(c00 / n - 0.25));
    }
  }
  return total / 65536.0;
}

/// Hybrid bound from the leftover hash lemma: bit i sees min-entropy k - i and
/// a hash family with collision probability at most 2^-1 + (B - 1) / 2^l.
inline double toy_tv_bound(double min_entropy, std::uint64_t blocks, unsigned field_degree, std::uint64_t t) {
  double bound = 0.0;
  for (std::uint64_t i = 0; i < t; ++i) {
    bound += 0.5 * std::sqrt(std::pow(2.0, 1.0 + static_cast<double>(i) - min_entropy) +
                             2.0 * static_cast<double>(blocks - 1) / std::pow(2.0, field_degree));
  }
  return bound;
}

}  // namespace bellrand::fixtures
