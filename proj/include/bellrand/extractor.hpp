#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "bellrand/bits.hpp"
#include "bellrand/core.hpp"
#include "bellrand/gf2.hpp"

namespace bellrand {

/// Deterministic Miller-Rabin, exact for every 64-bit integer.
bool is_prime(std::uint64_t n);
/// Smallest prime strictly greater than n.
std::uint64_t next_prime_above(std::uint64_t n);

/// ceil(log2(4 q t^2 / eps^2)).
unsigned design_log_bound(std::uint64_t q, std::uint64_t t, double eps);

/// Seed-length bound w^2 max{2, 1 + ceil((log2(t - e) - log2(w - e)) / (log2 e - log2(e - 1)))}
/// for t >= 3, and w^2 for t <= 2.
std::uint64_t seed_length_bound(std::uint64_t t, std::uint64_t w);

struct SeedLength {
  std::uint64_t w;
  std::uint64_t d;
};

/// w = smallest prime above 2 design_log_bound(q, t, eps); d = the seed length
/// reported for the construction (never below its actual consumption).
SeedLength seed_length(std::uint64_t q, std::uint64_t t, double eps);

/// Block weak design built from polynomial designs over GF(w).
///
/// Block b owns seed positions [b w^2, (b + 1) w^2). Inside a block, the set with
/// local index i takes the polynomial p_i whose coefficients are the base-w digits
/// of i (least significant digit = constant term), and holds the positions
/// p_i(a) w + a for a = 0..w-1. Blocks are filled greedily so that
/// sum_{j<i} 2^|S_i & S_j| <= t - 1 for every set.
class WeakDesign {
 public:
  WeakDesign(std::uint64_t t, std::uint64_t w);

  std::uint64_t sets() const noexcept { return t_; }
  std::uint64_t w() const noexcept { return w_; }
  const std::vector<std::uint64_t>& block_sizes() const noexcept { return block_sizes_; }
  std::uint64_t block_count() const noexcept { return block_sizes_.size(); }
  /// Seed bits actually read: block_count() w^2.
  std::uint64_t consumption() const noexcept { return block_count() * w_ * w_; }

  /// Seed position of the a-th element of set i.
  std::uint64_t position(std::uint64_t i, std::uint64_t a) const;
  std::vector<std::uint64_t> set(std::uint64_t i) const;

  /// Exact sum over earlier sets j of the same basic design of 2^|S_i & S_j|
  /// for local index i, saturating at 2^64 - 1.
  static std::uint64_t overlap_mass(std::uint64_t local_index, std::uint64_t w);

 private:
  std::uint64_t t_;
  std::uint64_t w_;
  std::vector<std::uint64_t> block_sizes_;
  std::vector<std::uint64_t> block_first_;  // global index of each block's first set
};

/// All t sets of the design, each listed in order of a.
std::vector<std::vector<std::uint64_t>> weak_design(std::uint64_t t, std::uint64_t w);

struct ExtractorSpec {
  std::uint64_t q = 0;
  std::uint64_t t = 0;
  double eps_1bit = 0.0;
  std::uint64_t w = 0;
  std::uint64_t d = 0;
  unsigned field_degree = 0;  // l = floor(w / 2)
  SparseModulus modulus;
  std::vector<std::uint64_t> block_sizes;

  std::uint64_t input_blocks() const { return (q + field_degree - 1) / field_degree; }
};

ExtractorSpec make_extractor_spec(std::uint64_t q, std::uint64_t t, double eps_1bit);

/// Spec with an explicitly chosen prime w (d is the bound for that w); for toy instances.
ExtractorSpec make_extractor_spec_for_prime(std::uint64_t q, std::uint64_t t, std::uint64_t w,
                                            double eps_1bit);

/// One-bit Reed-Solomon-Hadamard extractor over GF(2^l).
///
/// The input is cut into B = ceil(q / l) blocks c_0..c_{B-1} of l bits (bit k of a
/// block is the coefficient of x^k; the last block is zero padded). The w-bit
/// sub-seed splits into an evaluation segment of ceil(w/2) bits and an
/// inner-product segment of floor(w/2) = l bits; alpha takes the low l bits of the
/// evaluation segment (its top bit is unused). The output is
/// <c_0 alpha^(B-1) + ... + c_{B-1}, r> over GF(2).
bool rsh_bit(const BinaryField& field, const BitVector& input, std::uint64_t q,
             const BitVector& subseed);

/// Incremental extractor: input bits may arrive in arbitrary chunks.
class StreamingExtractor {
 public:
  /// `threads` = 0 picks the hardware concurrency.
  StreamingExtractor(const ExtractorSpec& spec, const BitVector& seed, unsigned threads = 0);
  ~StreamingExtractor();
  StreamingExtractor(StreamingExtractor&&) noexcept;
  StreamingExtractor& operator=(StreamingExtractor&&) noexcept;

  void append(const BitVector& chunk);
  std::uint64_t consumed() const noexcept;
  /// Requires exactly q bits appended.
  BitVector finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

BitVector extract(const BitVector& input, const BitVector& seed, const ExtractorSpec& spec,
                  unsigned threads = 0);

/// Canonical outcome serialization: trial i gives bits (a_i, b_i) at (2i, 2i + 1).
/// Trials with 1-based index above `freeze_after` are serialized as outcome '00'.
BitVector outcome_bits(std::span<const TrialRecord> trials, std::uint64_t first_index = 1,
                       std::optional<std::uint64_t> freeze_after = std::nullopt);

}  // namespace bellrand
