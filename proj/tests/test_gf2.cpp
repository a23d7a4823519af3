#include <gtest/gtest.h>

#include <random>

#include "bellrand/errors.hpp"
#include "bellrand/gf2.hpp"

using namespace bellrand;

namespace {

Gf2Poly to_poly(const BinaryField::Element& e, unsigned words) { return Gf2Poly(e.begin(), e.begin() + words); }

BinaryField::Element random_element(std::mt19937_64& rng, unsigned degree) {
  BinaryField::Element e{};
  for (unsigned i = 0; i * 64 < degree; ++i) {
    e[i] = rng();
    const unsigned bits = std::min(64u, degree - 64 * i);
    if (bits < 64) e[i] &= (std::uint64_t{1} << bits) - 1;
  }
  return e;
}

// Multiplication in GF(2^8) with the AES polynomial, one shift at a time.
std::uint8_t aes_mul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t p = 0;
  for (int i = 0; i < 8; ++i) {
    if (b & 1) p ^= a;
    const bool carry = a & 0x80;
    a = static_cast<std::uint8_t>(a << 1);
    if (carry) a ^= 0x1B;
    b >>= 1;
  }
  return p;
}

}  // namespace

TEST(Clmul, HardwareAndPortableAgree) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100'000; ++i) {
    const std::uint64_t a = rng();
    const std::uint64_t b = i % 7 == 0 ? ~std::uint64_t{0} : rng();
    std::uint64_t lo1, hi1, lo2, hi2;
    gf2::clmul64(a, b, lo1, hi1);
    gf2::clmul64_portable(a, b, lo2, hi2);
    ASSERT_EQ(lo1, lo2);
    ASSERT_EQ(hi1, hi2);
  }
}

TEST(Clmul, SmallProducts) {
  std::uint64_t lo, hi;
  gf2::clmul64_portable(0b11, 0b11, lo, hi);  // (x + 1)^2 = x^2 + 1
  EXPECT_EQ(lo, 0b101u);
  EXPECT_EQ(hi, 0u);
  gf2::clmul64_portable(std::uint64_t{1} << 63, 0b10, lo, hi);
  EXPECT_EQ(lo, 0u);
  EXPECT_EQ(hi, 1u);
}

TEST(Polynomials, Irreducibility) {
  EXPECT_TRUE(gf2::is_irreducible({0x11B}));   // AES
  EXPECT_FALSE(gf2::is_irreducible({0x101}));  // x^8 + 1 = (x + 1)^8
  EXPECT_TRUE(gf2::is_irreducible({0b111}));   // x^2 + x + 1
  EXPECT_FALSE(gf2::is_irreducible({0b101}));  // (x + 1)^2
  EXPECT_FALSE(gf2::is_irreducible({0x11}));   // x^4 + 1
  EXPECT_TRUE(gf2::is_irreducible({0x13}));    // x^4 + x + 1
}

TEST(Polynomials, GcdAndRemainder) {
  const Gf2Poly a = gf2::multiply({0b111}, {0b1011});  // (x^2+x+1)(x^3+x+1)
  EXPECT_EQ(gf2::remainder(a, {0b111}), Gf2Poly{});
  EXPECT_EQ(gf2::gcd(a, {0b1011}), Gf2Poly{0b1011});
  EXPECT_EQ(gf2::degree({}), -1);
  EXPECT_EQ(gf2::degree({0, 1}), 64);
}

TEST(SparseModulus, MatchesTheStandardTables) {
  const std::vector<std::pair<unsigned, std::vector<unsigned>>> expected = {
      {8, {4, 3, 1}}, {127, {1}}, {140, {15}}, {163, {7, 6, 3}}, {233, {74}}, {283, {12, 7, 5}}, {409, {87}},
  };
  for (const auto& [degree, terms] : expected) {
    const auto m = find_sparse_irreducible(degree);
    EXPECT_EQ(m.degree, degree);
    EXPECT_EQ(m.terms, terms) << degree;
    EXPECT_TRUE(gf2::is_irreducible(m.dense()));
  }
  EXPECT_EQ(find_sparse_irreducible(8).to_string(), "x^8 + x^4 + x^3 + x + 1");
  EXPECT_THROW(find_sparse_irreducible(1), DomainError);
  EXPECT_THROW(find_sparse_irreducible(513), DomainError);
}

TEST(BinaryField, AesFieldAgainstShiftAndAdd) {
  const BinaryField f(find_sparse_irreducible(8));
  for (unsigned a = 0; a < 256; ++a) {
    for (unsigned b = 0; b < 256; b += 3) {
      BinaryField::Element ea{}, eb{};
      ea[0] = a;
      eb[0] = b;
      ASSERT_EQ(f.multiply(ea, eb)[0], aes_mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)));
    }
  }
  BinaryField::Element x{}, y{};
  x[0] = 0x57;
  y[0] = 0x83;
  EXPECT_EQ(f.multiply(x, y)[0], 0xC1u);
}

TEST(BinaryField, AgreesWithDenseArithmetic) {
  std::mt19937_64 rng(2);
  for (unsigned degree : {2u, 8u, 63u, 64u, 65u, 127u, 140u, 163u, 233u, 283u, 409u, 512u}) {
    const auto modulus = find_sparse_irreducible(degree);
    const BinaryField f(modulus);
    for (int rep = 0; rep < 50; ++rep) {
      const auto a = random_element(rng, degree);
      const auto b = random_element(rng, degree);
      auto want = gf2::remainder(gf2::multiply(to_poly(a, f.words()), to_poly(b, f.words())), modulus.dense());
      want.resize(f.words(), 0);
      const auto got = f.multiply(a, b);
      ASSERT_EQ(to_poly(got, f.words()), want) << degree;
    }
  }
}

TEST(BinaryField, HornerPortableAndHardwareAgree) {
  std::mt19937_64 rng(3);
  for (unsigned degree : {8u, 140u, 283u}) {
    const BinaryField f(find_sparse_irreducible(degree));
    std::vector<BinaryField::Element> blocks(257);
    for (auto& b : blocks) b = random_element(rng, degree);
    std::vector<BinaryField::Element> ys(7), alphas(7);
    for (auto& a : alphas) a = random_element(rng, degree);
    auto ys2 = ys;
    f.horner(ys, alphas, blocks, false);
    f.horner(ys2, alphas, blocks, true);
    EXPECT_EQ(ys, ys2);
    // Lane-by-lane, step-by-step reference.
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      BinaryField::Element y{};
      for (const auto& c : blocks) {
        y = f.multiply(y, alphas[i]);
        for (unsigned k = 0; k < f.words(); ++k) y[k] ^= c[k];
      }
      EXPECT_EQ(y, ys[i]);
    }
  }
}

TEST(BinaryField, FromBitsAndInnerProduct) {
  BitVector bits(20);
  bits.set(3, true);
  bits.set(10, true);
  bits.set(19, true);
  const BinaryField f(find_sparse_irreducible(8));
  EXPECT_EQ(f.from_bits(bits, 3)[0], 0b10000001u);
  EXPECT_EQ(f.from_bits(bits, 16)[0], 0b1000u);  // bits past the end read as zero
  BinaryField::Element a{}, b{};
  a[0] = 0b1011;
  b[0] = 0b0011;
  EXPECT_FALSE(BinaryField::inner_product(a, b));
  b[0] = 0b1111;
  EXPECT_TRUE(BinaryField::inner_product(a, b));
}
