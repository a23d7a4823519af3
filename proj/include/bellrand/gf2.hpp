#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bellrand/bits.hpp"

namespace bellrand {

/// Dense GF(2)[x] polynomial; bit k of the word vector is the coefficient of x^k.
using Gf2Poly = std::vector<std::uint64_t>;

namespace gf2 {

int degree(const Gf2Poly& p);
Gf2Poly multiply(const Gf2Poly& a, const Gf2Poly& b);
Gf2Poly remainder(Gf2Poly a, const Gf2Poly& f);
Gf2Poly gcd(Gf2Poly a, Gf2Poly b);

/// Ben-Or test: f of degree l is irreducible iff gcd(x^(2^i) - x, f) = 1 for i = 1..l/2.
bool is_irreducible(const Gf2Poly& f);

/// 128-bit carry-less product of two 64-bit words.
void clmul64(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi);
/// Table-driven fallback; clmul64 dispatches to the CPU instruction when present.
void clmul64_portable(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi);
bool hardware_clmul_available();
/// Routes every product through the portable path (also set by the
/// BELLRAND_PORTABLE_CLMUL environment variable); for cross-platform checks.
void force_portable_clmul(bool on);

}  // namespace gf2

/// x^degree + x^terms[0] + ... + x^terms[k] + 1 with degree > terms[0] > ... > 0.
struct SparseModulus {
  unsigned degree = 0;
  std::vector<unsigned> terms;

  Gf2Poly dense() const;
  std::string to_string() const;
  friend bool operator==(const SparseModulus&, const SparseModulus&) = default;
};

/// Deterministic choice of irreducible modulus: the trinomial with the
/// smallest middle exponent, else the pentanomial x^l + x^k1 + x^k2 + x^k3 + 1
/// with k1 smallest, then k2, then k3.
SparseModulus find_sparse_irreducible(unsigned degree);

/// GF(2^l) for l <= 512 with a sparse modulus.
class BinaryField {
 public:
  static constexpr unsigned kMaxDegree = 512;
  static constexpr unsigned kMaxWords = kMaxDegree / 64;
  using Element = std::array<std::uint64_t, kMaxWords>;

  explicit BinaryField(SparseModulus modulus);

  unsigned degree() const noexcept { return modulus_.degree; }
  unsigned words() const noexcept { return words_; }
  const SparseModulus& modulus() const noexcept { return modulus_; }

  Element multiply(const Element& a, const Element& b) const;

  /// Horner steps y <- y * alpha + c for each block c in order. `portable`
  /// forces the table-based carry-less product.
  Element horner(Element y, const Element& alpha, std::span<const Element> blocks, bool portable = false) const;
  /// The same for several independent accumulators, ys[i] using alphas[i].
  void horner(std::span<Element> ys, std::span<const Element> alphas, std::span<const Element> blocks,
              bool portable = false) const;

  /// The element whose coefficient of x^k is bit offset + k of `bits`
  /// (bits past the end read as 0).
  Element from_bits(const BitVector& bits, std::size_t offset) const;

  /// Parity of a & b.
  static bool inner_product(const Element& a, const Element& b);

 private:
  SparseModulus modulus_;
  unsigned words_;
};

}  // namespace bellrand
