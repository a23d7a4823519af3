#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "bellrand/extractor.hpp"
#include "bellrand/io.hpp"
#include "bellrand/sim.hpp"
#include "toy_extractor.hpp"

using namespace bellrand;

namespace {

BitVector hashed_bits(std::uint64_t key, std::size_t n) {
  BitVector v(n);
  for (std::size_t i = 0; i < n; ++i) v.set(i, counter_hash(key, i) & 1);
  return v;
}

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

std::uint8_t byte_at(const BitVector& v, std::size_t offset) {
  std::uint8_t b = 0;
  for (int k = 0; k < 8; ++k) {
    if (offset + k < v.size() && v.get(offset + k)) b |= static_cast<std::uint8_t>(1u << k);
  }
  return b;
}

}  // namespace

TEST(Primes, MillerRabinAgreesWithSieve) {
  constexpr std::size_t kLimit = 200'000;
  std::vector<bool> composite(kLimit, false);
  composite[0] = composite[1] = true;
  for (std::size_t i = 2; i * i < kLimit; ++i) {
    if (!composite[i]) {
      for (std::size_t j = i * i; j < kLimit; j += i) composite[j] = true;
    }
  }
  for (std::size_t n = 0; n < kLimit; ++n) ASSERT_EQ(is_prime(n), !composite[n]) << n;
  EXPECT_TRUE(is_prime(18446744073709551557ull));  // largest 64-bit prime
  EXPECT_FALSE(is_prime(3215031751ull));           // strong pseudoprime to bases 2, 3, 5, 7
  EXPECT_EQ(next_prime_above(278), 281u);
  EXPECT_EQ(next_prime_above(281), 283u);
  EXPECT_EQ(next_prime_above(16), 17u);
}

TEST(SeedLength, DataSetFive) {
  const std::uint64_t q = 2 * 55'110'210ull;
  EXPECT_EQ(design_log_bound(q, 1024, 2.5e-14), 140u);
  const auto s = seed_length(q, 1024, 2.5e-14);
  EXPECT_EQ(s.w, 281u);
  EXPECT_EQ(s.d, 315'844u);
  const WeakDesign design(1024, 281);
  EXPECT_EQ(design.block_sizes(), (std::vector<std::uint64_t>{562, 281, 181}));
  EXPECT_LE(design.consumption(), s.d);
}

TEST(SeedLength, BoundCoversConsumption) {
  for (std::uint64_t w : {5u, 7u, 11u, 17u, 31u, 101u, 281u}) {
    for (std::uint64_t t = 1; t <= 3000; t += (t < 100 ? 1 : 37)) {
      EXPECT_LE(WeakDesign(t, w).consumption(), seed_length_bound(t, w)) << t << ' ' << w;
    }
  }
  EXPECT_EQ(seed_length_bound(1, 17), 289u);
  EXPECT_EQ(seed_length_bound(2, 17), 289u);
}

TEST(WeakDesign, OverlapBoundsHoldExhaustively) {
  for (std::uint64_t w : {3u, 5u, 7u, 11u, 13u}) {
    for (std::uint64_t t = 1; t <= 64; ++t) {
      const WeakDesign design(t, w);
      const auto sets = weak_design(t, w);
      ASSERT_EQ(sets.size(), t);
      std::uint64_t seed_bits = design.consumption();
      std::vector<std::set<std::uint64_t>> as_sets;
      for (const auto& s : sets) {
        ASSERT_EQ(s.size(), w);
        std::set<std::uint64_t> u(s.begin(), s.end());
        ASSERT_EQ(u.size(), w);
        for (auto p : s) ASSERT_LT(p, seed_bits);
        as_sets.push_back(std::move(u));
      }
      std::uint64_t first = 0;
      std::vector<std::uint64_t> block_of(t);
      for (std::size_t b = 0; b < design.block_sizes().size(); ++b) {
        for (std::uint64_t k = 0; k < design.block_sizes()[b]; ++k) block_of[first + k] = b;
        first += design.block_sizes()[b];
      }
      for (std::uint64_t i = 0; i < t; ++i) {
        double mass = 0.0;
        for (std::uint64_t j = 0; j < i; ++j) {
          std::size_t common = 0;
          for (auto p : as_sets[i]) common += as_sets[j].count(p);
          if (block_of[i] != block_of[j]) ASSERT_EQ(common, 0u) << "blocks overlap";
          ASSERT_LT(common, w);
          mass += std::ldexp(1.0, static_cast<int>(common));
        }
        EXPECT_LE(mass, static_cast<double>(t - 1)) << "t=" << t << " w=" << w << " i=" << i;
      }
    }
  }
}

TEST(WeakDesign, ClosedFormOverlapMassMatchesBruteForce) {
  for (std::uint64_t w : {3u, 5u, 7u}) {
    const WeakDesign design(w * w * w, w);  // enough sets for several digits in the first block
    const std::uint64_t first_block = design.block_sizes()[0];
    for (std::uint64_t i = 0; i < first_block; ++i) {
      std::set<std::uint64_t> si;
      for (auto p : design.set(i)) si.insert(p);
      std::uint64_t mass = 0;
      for (std::uint64_t j = 0; j < i; ++j) {
        std::size_t common = 0;
        for (auto p : design.set(j)) common += si.count(p);
        mass += std::uint64_t{1} << common;
      }
      ASSERT_EQ(WeakDesign::overlap_mass(i, w), mass) << w << ' ' << i;
    }
  }
}

TEST(WeakDesign, SmallCases) {
  const WeakDesign one(1, 5);
  EXPECT_EQ(one.set(0), (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  EXPECT_EQ(WeakDesign(16, 5).block_sizes(), (std::vector<std::uint64_t>{10, 5, 1}));
  EXPECT_THROW(WeakDesign(4, 9), DomainError);
  EXPECT_THROW(WeakDesign(0, 5), DomainError);
}

TEST(Rsh, HandComputedBitInTheAesField) {
  // w = 17, l = 8: sub-seed bits [0, 8) give alpha, bit 8 is unused, [9, 17) give r.
  const BinaryField field(find_sparse_irreducible(8));
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const std::uint64_t q = 1 + rng() % 40;
    BitVector input(q), subseed(17);
    for (std::size_t i = 0; i < q; ++i) input.set(i, rng() & 1);
    for (std::size_t i = 0; i < 17; ++i) subseed.set(i, rng() & 1);
    const std::uint8_t alpha = byte_at(subseed, 0);
    const std::uint8_t r = byte_at(subseed, 9);
    std::uint8_t y = 0;
    for (std::size_t off = 0; off < q; off += 8) y = aes_mul(y, alpha) ^ byte_at(input, off);
    const bool want = std::popcount(static_cast<unsigned>(y & r)) & 1;
    ASSERT_EQ(rsh_bit(field, input, q, subseed), want);
  }
}

TEST(Rsh, WorkedExample) {
  // Input blocks 0x57, 0x83; alpha = 0x02, r = 0xFF:
  // y = 0x57 * 0x02 + 0x83 = 0xAE ^ 0x83 = 0x2D, parity(0x2D) = 0.
  const BinaryField field(find_sparse_irreducible(8));
  BitVector input = BitVector::from_bytes(std::vector<std::uint8_t>{0x57, 0x83}, 16);
  BitVector subseed(17);
  subseed.set(1, true);
  for (int k = 9; k < 17; ++k) subseed.set(k, true);
  EXPECT_FALSE(rsh_bit(field, input, 16, subseed));
  subseed.set(9, false);  // r = 0xFE: parity(0x2C) = 1
  EXPECT_TRUE(rsh_bit(field, input, 16, subseed));
}

TEST(Extractor, MatchesPerBitDefinition) {
  const auto spec = make_extractor_spec(3000, 24, 1e-3);
  const auto input = hashed_bits(1, spec.q);
  const auto seed = hashed_bits(2, spec.d);
  const auto out = extract(input, seed, spec, 1);
  const BinaryField field(spec.modulus);
  const WeakDesign design(spec.t, spec.w);
  for (std::uint64_t i = 0; i < spec.t; ++i) {
    BitVector sub(spec.w);
    for (std::uint64_t a = 0; a < spec.w; ++a) sub.set(a, seed.get(design.position(i, a)));
    EXPECT_EQ(out.get(i), rsh_bit(field, input, spec.q, sub)) << i;
  }
}

TEST(Extractor, StreamingChunksAndThreadsDoNotChangeTheOutput) {
  const auto spec = make_extractor_spec(50'000, 64, 1e-4);
  const auto input = hashed_bits(3, spec.q);
  const auto seed = hashed_bits(4, spec.d);
  const auto reference = extract(input, seed, spec, 1);
  std::mt19937_64 rng(5);
  for (unsigned threads : {1u, 3u, 8u}) {
    StreamingExtractor ext(spec, seed, threads);
    std::size_t pos = 0;
    while (pos < spec.q) {
      const std::size_t len = std::min<std::size_t>(spec.q - pos, 1 + rng() % 5000);
      ext.append(input.slice(pos, pos + len));
      pos += len;
    }
    EXPECT_EQ(ext.consumed(), spec.q);
    EXPECT_EQ(ext.finish(), reference) << threads;
  }
}

TEST(Extractor, FrozenRegressionVector) {
  const auto spec = make_extractor_spec(100'000, 128, 1e-6);
  EXPECT_EQ(spec.w, 149u);
  EXPECT_EQ(spec.modulus.to_string(), "x^74 + x^35 + 1");
  const auto out = extract(hashed_bits(0xBE11, spec.q), hashed_bits(0x5EED, spec.d), spec, 2);
  const auto bytes = out.to_bytes();
  EXPECT_EQ(io::sha256_hex(bytes), "fcd22132850ab98b077e71ac4e629f98a4c13e9b95d5033106d878aad41673e7");
}

TEST(Extractor, InputValidation) {
  const auto spec = make_extractor_spec(1000, 8, 1e-3);
  EXPECT_THROW(extract(BitVector(999), BitVector(spec.d), spec), InputError);
  EXPECT_THROW(extract(BitVector(1000), BitVector(spec.d - 1), spec), InputError);
  StreamingExtractor ext(spec, BitVector(spec.d));
  ext.append(BitVector(10));
  EXPECT_THROW(ext.finish(), InputError);
  EXPECT_THROW(make_extractor_spec(4, 8, 1e-3), DomainError);
}

TEST(Extractor, OutcomeSerialization) {
  std::vector<TrialRecord> trials = {{0, 0, 1, 0}, {1, 1, 0, 1}, {0, 1, 1, 1}};
  const auto bits = outcome_bits(trials);
  ASSERT_EQ(bits.size(), 6u);
  EXPECT_EQ(std::vector<bool>({bits[0], bits[1], bits[2], bits[3], bits[4], bits[5]}),
            std::vector<bool>({true, false, false, true, true, true}));
  const auto frozen = outcome_bits(trials, 1, 1);
  EXPECT_EQ(frozen.popcount(), 1u);
  const auto shifted = outcome_bits(trials, 10, 10);
  EXPECT_EQ(shifted.popcount(), 1u);
}

TEST(ToyExtractor, SpecSelectsTheToyField) {
  const auto spec = make_extractor_spec(fixtures::kToyQ, fixtures::kToyT, fixtures::kToyEps);
  EXPECT_EQ(spec.w, fixtures::kToyW);
  EXPECT_EQ(spec.field_degree, 8u);
  EXPECT_EQ(spec.input_blocks(), 1u);
  EXPECT_EQ(spec.d, 289u);
}

TEST(ToyExtractor, ClosedFormAgreesWithTheExtractor) {
  const auto spec = make_extractor_spec(fixtures::kToyQ, fixtures::kToyT, fixtures::kToyEps);
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 300; ++rep) {
    BitVector seed(spec.d);
    for (std::size_t i = 0; i < spec.d; ++i) seed.set(i, rng() & 1);
    const std::uint8_t x = static_cast<std::uint8_t>(rng());
    const auto out = extract(BitVector::from_bytes(std::vector<std::uint8_t>{x}, 8), seed, spec, 1);
    const std::uint8_t r0 = byte_at(seed, 9);
    const std::uint8_t r1 = byte_at(seed, 17 + 9);
    EXPECT_EQ(out.get(0), static_cast<bool>(std::popcount(static_cast<unsigned>(x & r0)) & 1));
    EXPECT_EQ(out.get(1), static_cast<bool>(std::popcount(static_cast<unsigned>(x & r1)) & 1));
  }
}

TEST(ToyExtractor, ExhaustiveDistanceWithinBound) {
  std::mt19937_64 rng(2024);
  const double bound = fixtures::toy_tv_bound(5.0, 1, 8, 2);
  EXPECT_NEAR(bound, 0.125 + 0.5 * std::sqrt(0.125), 1e-15);
  for (int s = 0; s < 3; ++s) {
    const auto source = fixtures::random_flat_source(rng, 32);
    const double tv = fixtures::toy_tv_distance(source);
    EXPECT_LE(tv, bound) << s;
    EXPECT_GT(tv, 0.0);
  }
  // A single point source is maximally far: every nonzero r fixes the output.
  const double point = fixtures::toy_tv_distance({0x5A});
  EXPECT_NEAR(point, 0.75, 1e-12);
}
