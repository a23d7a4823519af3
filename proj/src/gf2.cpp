#include "bellrand/gf2.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdlib>
#include <sstream>
#include <utility>

#include "bellrand/errors.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#include <immintrin.h>
#define BELLRAND_HAVE_PCLMUL 1
#endif

namespace bellrand {

namespace gf2 {

namespace {

void trim(Gf2Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

void flip(Gf2Poly& p, unsigned k) {
  if (p.size() <= k / 64) p.resize(k / 64 + 1, 0);
  p[k / 64] ^= std::uint64_t{1} << (k % 64);
}

// p ^= q << shift
void xor_shifted(Gf2Poly& p, const Gf2Poly& q, unsigned shift) {
  const unsigned ws = shift / 64;
  const unsigned bs = shift % 64;
  const std::size_t need = q.size() + ws + 1;
  if (p.size() < need) p.resize(need, 0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i + ws] ^= q[i] << bs;
    if (bs != 0) p[i + ws + 1] ^= q[i] >> (64 - bs);
  }
}

#ifdef BELLRAND_HAVE_PCLMUL
__attribute__((target("pclmul,sse2"))) void clmul64_hw(std::uint64_t a, std::uint64_t b, std::uint64_t& lo,
                                                       std::uint64_t& hi) {
  const __m128i va = _mm_set_epi64x(0, static_cast<long long>(a));
  const __m128i vb = _mm_set_epi64x(0, static_cast<long long>(b));
  const __m128i r = _mm_clmulepi64_si128(va, vb, 0x00);
  lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
  hi = static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)));
}
#endif

}  // namespace

int degree(const Gf2Poly& p) {
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] != 0) return static_cast<int>(64 * i) + 63 - std::countl_zero(p[i]);
  }
  return -1;
}

Gf2Poly multiply(const Gf2Poly& a, const Gf2Poly& b) {
  if (a.empty() || b.empty()) return {};
  Gf2Poly out(a.size() + b.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::uint64_t lo = 0;
      std::uint64_t hi = 0;
      clmul64(a[i], b[j], lo, hi);
      out[i + j] ^= lo;
      out[i + j + 1] ^= hi;
    }
  }
  trim(out);
  return out;
}

Gf2Poly remainder(Gf2Poly a, const Gf2Poly& f) {
  const int df = degree(f);
  if (df < 0) throw DomainError("polynomial division by zero");
  for (int da = degree(a); da >= df; da = degree(a)) {
    xor_shifted(a, f, static_cast<unsigned>(da - df));
  }
  trim(a);
  return a;
}

Gf2Poly gcd(Gf2Poly a, Gf2Poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    a = remainder(std::move(a), b);
    std::swap(a, b);
  }
  return a;
}

bool is_irreducible(const Gf2Poly& f) {
  const int l = degree(f);
  if (l < 1) return false;
  if (l == 1) return true;
  Gf2Poly x_poly;
  flip(x_poly, 1);
  Gf2Poly power = x_poly;  // x^(2^i) mod f
  for (int i = 1; i <= l / 2; ++i) {
    power = remainder(multiply(power, power), f);
    Gf2Poly diff = power;
    flip(diff, 1);
    trim(diff);
    if (degree(gcd(f, diff)) != 0) return false;
  }
  return true;
}

void clmul64_portable(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
  unsigned __int128 table[16];
  table[0] = 0;
  for (unsigned i = 1; i < 16; ++i) {
    table[i] = (i & 1) ? static_cast<unsigned __int128>(b) : 0;
    for (unsigned bit = 1; bit < 4; ++bit) {
      if ((i >> bit) & 1) table[i] ^= static_cast<unsigned __int128>(b) << bit;
    }
  }
  unsigned __int128 acc = 0;
  for (int nibble = 15; nibble >= 0; --nibble) {
    acc = (acc << 4) ^ table[(a >> (4 * nibble)) & 0xF];
  }
  lo = static_cast<std::uint64_t>(acc);
  hi = static_cast<std::uint64_t>(acc >> 64);
}

namespace {
std::atomic<bool> g_force_portable{std::getenv("BELLRAND_PORTABLE_CLMUL") != nullptr};
}  // namespace

void force_portable_clmul(bool on) { g_force_portable.store(on, std::memory_order_relaxed); }

bool hardware_clmul_available() {
#ifdef BELLRAND_HAVE_PCLMUL
  static const bool available = __builtin_cpu_supports("pclmul");
  return available && !g_force_portable.load(std::memory_order_relaxed);
#else
  return false;
#endif
}

void clmul64(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
#ifdef BELLRAND_HAVE_PCLMUL
  if (hardware_clmul_available()) {
    clmul64_hw(a, b, lo, hi);
    return;
  }
#endif
  clmul64_portable(a, b, lo, hi);
}

}  // namespace gf2

Gf2Poly SparseModulus::dense() const {
  Gf2Poly p((degree + 64) / 64, 0);
  auto set = [&p](unsigned k) { p[k / 64] |= std::uint64_t{1} << (k % 64); };
  set(degree);
  for (unsigned k : terms) set(k);
  set(0);
  return p;
}

std::string SparseModulus::to_string() const {
  std::ostringstream out;
  out << "x^" << degree;
  for (unsigned k : terms) out << (k == 1 ? " + x" : " + x^" + std::to_string(k));
  out << " + 1";
  return out.str();
}

SparseModulus find_sparse_irreducible(unsigned degree) {
  if (degree < 2 || degree > BinaryField::kMaxDegree) {
    throw DomainError("field degree must lie in [2, " + std::to_string(BinaryField::kMaxDegree) + "]");
  }
  for (unsigned k = 1; k < degree; ++k) {
    SparseModulus m{degree, {k}};
    if (gf2::is_irreducible(m.dense())) return m;
  }
  for (unsigned k1 = 3; k1 < degree; ++k1) {
    for (unsigned k2 = 2; k2 < k1; ++k2) {
      for (unsigned k3 = 1; k3 < k2; ++k3) {
        SparseModulus m{degree, {k1, k2, k3}};
        if (gf2::is_irreducible(m.dense())) return m;
      }
    }
  }
  throw DomainError("no sparse irreducible polynomial of degree " + std::to_string(degree));
}

BinaryField::BinaryField(SparseModulus modulus) : modulus_(std::move(modulus)) {
  if (modulus_.degree < 2 || modulus_.degree > kMaxDegree) {
    throw DomainError("field degree out of range");
  }
  for (unsigned k : modulus_.terms) {
    if (k == 0 || k >= modulus_.degree) throw DomainError("modulus term out of range");
  }
  words_ = (modulus_.degree + 63) / 64;
}

namespace {

// Fixed-width kernels: N words per element, Clmul the 64x64 carry-less product.
struct PortableClmul {
  static void mul(std::uint64_t a, std::uint64_t b, std::uint64_t& lo, std::uint64_t& hi) {
    gf2::clmul64_portable(a, b, lo, hi);
  }
};

#ifdef BELLRAND_HAVE_PCLMUL
struct HardwareClmul {
  __attribute__((target("pclmul,sse2"))) static inline void mul(std::uint64_t a, std::uint64_t b, std::uint64_t& lo,
                                                                 std::uint64_t& hi) {
    const __m128i r = _mm_clmulepi64_si128(_mm_cvtsi64_si128(static_cast<long long>(a)),
                                           _mm_cvtsi64_si128(static_cast<long long>(b)), 0x00);
    lo = static_cast<std::uint64_t>(_mm_cvtsi128_si64(r));
    hi = static_cast<std::uint64_t>(_mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)));
  }
};
#define BELLRAND_KERNEL_TARGET __attribute__((target("pclmul,sse2"), flatten))
#endif

template <unsigned N, class Clmul>
struct Kernel {
  static constexpr unsigned kP = 2 * N;

  static inline void mul(const std::uint64_t* a, const std::uint64_t* b, std::uint64_t* out, unsigned l,
                         const unsigned* terms, unsigned term_count) {
    std::uint64_t p[kP + 1] = {};
    for (unsigned i = 0; i < N; ++i) {
      for (unsigned j = 0; j < N; ++j) {
        std::uint64_t lo;
        std::uint64_t hi;
        Clmul::mul(a[i], b[j], lo, hi);
        p[i + j] ^= lo;
        p[i + j + 1] ^= hi;
      }
    }
    const unsigned lw = l / 64;
    const unsigned lb = l % 64;
    for (;;) {
      std::uint64_t h[kP + 1] = {};
      std::uint64_t any = 0;
      const unsigned hw = kP + 1 - lw;
      for (unsigned i = 0; i < hw; ++i) {
        std::uint64_t v = p[i + lw] >> lb;
        if (lb != 0 && i + lw + 1 <= kP) v |= p[i + lw + 1] << (64 - lb);
        h[i] = v;
        any |= v;
      }
      if (any == 0) break;
      p[lw] &= lb == 0 ? 0 : (std::uint64_t{1} << lb) - 1;
      for (unsigned i = lw + 1; i <= kP; ++i) p[i] = 0;
      for (unsigned i = 0; i < hw; ++i) p[i] ^= h[i];
      for (unsigned t = 0; t < term_count; ++t) {
        const unsigned ws = terms[t] / 64;
        const unsigned bs = terms[t] % 64;
        for (unsigned i = 0; i < hw && i + ws <= kP; ++i) {
          p[i + ws] ^= h[i] << bs;
          if (bs != 0 && i + ws + 1 <= kP) p[i + ws + 1] ^= h[i] >> (64 - bs);
        }
      }
    }
    for (unsigned i = 0; i < N; ++i) out[i] = p[i];
  }

  // Independent Horner chains are stepped together in groups of four so the
  // carry-less products of different chains can overlap.
  template <unsigned K>
  static inline void horner_group(BinaryField::Element* ys, const BinaryField::Element* alphas,
                                  const BinaryField::Element* blocks, std::size_t count, unsigned l,
                                  const unsigned* terms, unsigned term_count) {
    std::uint64_t acc[K][N];
    std::uint64_t al[K][N];
    for (unsigned g = 0; g < K; ++g) {
      for (unsigned k = 0; k < N; ++k) {
        acc[g][k] = ys[g][k];
        al[g][k] = alphas[g][k];
      }
    }
    for (std::size_t j = 0; j < count; ++j) {
      for (unsigned g = 0; g < K; ++g) {
        mul(acc[g], al[g], acc[g], l, terms, term_count);
        for (unsigned k = 0; k < N; ++k) acc[g][k] ^= blocks[j][k];
      }
    }
    for (unsigned g = 0; g < K; ++g) {
      for (unsigned k = 0; k < N; ++k) ys[g][k] = acc[g][k];
    }
  }

  static void horner(BinaryField::Element* ys, const BinaryField::Element* alphas, std::size_t lanes,
                     const BinaryField::Element* blocks, std::size_t count, unsigned l, const unsigned* terms,
                     unsigned term_count) {
    std::size_t i = 0;
    for (; i + 4 <= lanes; i += 4) horner_group<4>(ys + i, alphas + i, blocks, count, l, terms, term_count);
    for (; i < lanes; ++i) horner_group<1>(ys + i, alphas + i, blocks, count, l, terms, term_count);
  }
};

using HornerFn = void (*)(BinaryField::Element*, const BinaryField::Element*, std::size_t,
                          const BinaryField::Element*, std::size_t, unsigned, const unsigned*, unsigned);

#ifdef BELLRAND_HAVE_PCLMUL
template <unsigned N>
BELLRAND_KERNEL_TARGET void horner_hw(BinaryField::Element* ys, const BinaryField::Element* alphas,
                                      std::size_t lanes, const BinaryField::Element* blocks, std::size_t count,
                                      unsigned l, const unsigned* terms, unsigned term_count) {
  Kernel<N, HardwareClmul>::horner(ys, alphas, lanes, blocks, count, l, terms, term_count);
}
#endif

template <unsigned N>
void horner_sw(BinaryField::Element* ys, const BinaryField::Element* alphas, std::size_t lanes,
               const BinaryField::Element* blocks, std::size_t count, unsigned l, const unsigned* terms,
               unsigned term_count) {
  Kernel<N, PortableClmul>::horner(ys, alphas, lanes, blocks, count, l, terms, term_count);
}

template <unsigned... Ns>
HornerFn pick(unsigned words, bool hw, std::integer_sequence<unsigned, Ns...>) {
  HornerFn fn = nullptr;
#ifdef BELLRAND_HAVE_PCLMUL
  if (hw) {
    ((words == Ns + 1 ? (fn = &horner_hw<Ns + 1>, 0) : 0), ...);
    return fn;
  }
#else
  (void)hw;
#endif
  ((words == Ns + 1 ? (fn = &horner_sw<Ns + 1>, 0) : 0), ...);
  return fn;
}

HornerFn select_horner(unsigned words, bool hw) {
  return pick(words, hw, std::make_integer_sequence<unsigned, BinaryField::kMaxWords>{});
}

}  // namespace

void BinaryField::horner(std::span<Element> ys, std::span<const Element> alphas, std::span<const Element> blocks,
                         bool portable) const {
  if (ys.size() != alphas.size()) throw DomainError("horner: one alpha per accumulator is required");
  const HornerFn fn = select_horner(words_, !portable && gf2::hardware_clmul_available());
  fn(ys.data(), alphas.data(), ys.size(), blocks.data(), blocks.size(), modulus_.degree, modulus_.terms.data(),
     static_cast<unsigned>(modulus_.terms.size()));
}

BinaryField::Element BinaryField::horner(Element y, const Element& alpha, std::span<const Element> blocks,
                                         bool portable) const {
  horner(std::span<Element>(&y, 1), std::span<const Element>(&alpha, 1), blocks, portable);
  return y;
}

BinaryField::Element BinaryField::multiply(const Element& a, const Element& b) const {
  const Element zero{};
  return horner(a, b, std::span<const Element>(&zero, 1));
}

BinaryField::Element BinaryField::from_bits(const BitVector& bits, std::size_t offset) const {
  Element out{};
  const unsigned l = modulus_.degree;
  for (unsigned i = 0; i < words_; ++i) {
    const unsigned count = std::min(64u, l - 64 * i);
    out[i] = bits.bits_at(offset + 64 * i, count);
  }
  return out;
}

bool BinaryField::inner_product(const Element& a, const Element& b) {
  std::uint64_t acc = 0;
  for (unsigned i = 0; i < kMaxWords; ++i) acc ^= a[i] & b[i];
  return std::popcount(acc) & 1;
}

}  // namespace bellrand
