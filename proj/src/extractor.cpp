#include "bellrand/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "bellrand/errors.hpp"

namespace bellrand {

namespace {

using u128 = unsigned __int128;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t n) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % n);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t n) {
  std::uint64_t result = 1 % n;
  base %= n;
  while (exp != 0) {
    if (exp & 1) result = mulmod(result, base, n);
    base = mulmod(base, base, n);
    exp >>= 1;
  }
  return result;
}

constexpr std::uint64_t kMaxDesignPrime = std::uint64_t{1} << 31;

void require_design_prime(std::uint64_t w) {
  if (!is_prime(w)) throw DomainError("design size " + std::to_string(w) + " is not prime");
  if (w >= kMaxDesignPrime) throw DomainError("design size too large");
}

std::vector<std::uint64_t> digits_base(std::uint64_t value, std::uint64_t base) {
  std::vector<std::uint64_t> digits;
  while (value != 0) {
    digits.push_back(value % base);
    value /= base;
  }
  return digits;
}

unsigned resolve_threads(unsigned threads) {
  if (threads != 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    if (n % p == 0) return n == p;
  }
  std::uint64_t d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (unsigned r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t next_prime_above(std::uint64_t n) {
  for (std::uint64_t c = n + 1; c != 0; ++c) {
    if (is_prime(c)) return c;
  }
  throw DomainError("no 64-bit prime above " + std::to_string(n));
}

unsigned design_log_bound(std::uint64_t q, std::uint64_t t, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("extractor error must lie in (0, 1)");
  if (q == 0 || t == 0) throw DomainError("extractor lengths must be positive");
  const long double e = eps;
  const long double lg = 2.0L + std::log2(static_cast<long double>(q)) +
                         2.0L * std::log2(static_cast<long double>(t)) - 2.0L * std::log2(e);
  return static_cast<unsigned>(std::ceil(lg));
}

std::uint64_t seed_length_bound(std::uint64_t t, std::uint64_t w) {
  const std::uint64_t w2 = w * w;
  if (t <= 2) return w2;
  constexpr double e = std::numbers::e;
  const double ratio = (std::log2(static_cast<double>(t) - e) - std::log2(static_cast<double>(w) - e)) /
                       (std::log2(e) - std::log2(e - 1.0));
  const double blocks = std::max(2.0, 1.0 + std::ceil(ratio));
  return w2 * static_cast<std::uint64_t>(blocks);
}

SeedLength seed_length(std::uint64_t q, std::uint64_t t, double eps) {
  if (t == 0 || q < t) throw DomainError("seed_length needs q >= t >= 1");
  const std::uint64_t w = next_prime_above(2 * static_cast<std::uint64_t>(design_log_bound(q, t, eps)));
  const WeakDesign design(t, w);
  return {w, std::max(seed_length_bound(t, w), design.consumption())};
}

std::uint64_t WeakDesign::overlap_mass(std::uint64_t local_index, std::uint64_t w) {
  const auto digits = digits_base(local_index, w);
  u128 mass = 0;
  u128 binom = 1;  // C(w, r)
  std::vector<u128> binoms{1};
  for (std::size_t k = 0; k < digits.size(); ++k) {
    if (k > 0) {
      const std::uint64_t r = k;
      binom = r <= w ? binom * (w - r + 1) / r : 0;
      binoms.push_back(binom);
    }
    if (digits[k] == 0) continue;
    // A_k = sum_{r=0}^{k} C(w, r) w^(k - r)
    u128 a_k = 0;
    u128 power = 1;
    for (std::size_t r = k + 1; r-- > 0;) {
      a_k += binoms[r] * power;
      power *= w;
    }
    mass += a_k * digits[k];
  }
  constexpr u128 cap = std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::min(mass, cap));
}

WeakDesign::WeakDesign(std::uint64_t t, std::uint64_t w) : t_(t), w_(w) {
  if (t == 0) throw DomainError("weak design needs at least one set");
  require_design_prime(w);
  std::uint64_t placed = 0;
  while (placed < t) {
    std::uint64_t count = 0;
    while (placed + count < t && placed + overlap_mass(count, w) <= t - 1) ++count;
    block_first_.push_back(placed);
    block_sizes_.push_back(count);
    placed += count;
  }
}

std::uint64_t WeakDesign::position(std::uint64_t i, std::uint64_t a) const {
  if (i >= t_ || a >= w_) throw DomainError("weak design index out of range");
  const auto it = std::upper_bound(block_first_.begin(), block_first_.end(), i);
  const std::uint64_t block = static_cast<std::uint64_t>(it - block_first_.begin()) - 1;
  const auto digits = digits_base(i - block_first_[block], w_);
  std::uint64_t p = 0;
  for (std::size_t k = digits.size(); k-- > 0;) p = (p * a + digits[k]) % w_;
  return block * w_ * w_ + p * w_ + a;
}

std::vector<std::uint64_t> WeakDesign::set(std::uint64_t i) const {
  std::vector<std::uint64_t> out(w_);
  for (std::uint64_t a = 0; a < w_; ++a) out[a] = position(i, a);
  return out;
}

std::vector<std::vector<std::uint64_t>> weak_design(std::uint64_t t, std::uint64_t w) {
  const WeakDesign design(t, w);
  std::vector<std::vector<std::uint64_t>> sets;
  sets.reserve(t);
  for (std::uint64_t i = 0; i < t; ++i) sets.push_back(design.set(i));
  return sets;
}

ExtractorSpec make_extractor_spec_for_prime(std::uint64_t q, std::uint64_t t, std::uint64_t w,
                                            double eps_1bit) {
  if (t == 0 || q < t) throw DomainError("extractor needs q >= t >= 1");
  if (!(eps_1bit > 0.0 && eps_1bit < 1.0)) throw DomainError("extractor error must lie in (0, 1)");
  require_design_prime(w);
  ExtractorSpec spec;
  spec.q = q;
  spec.t = t;
  spec.eps_1bit = eps_1bit;
  spec.w = w;
  spec.field_degree = static_cast<unsigned>(w / 2);
  spec.modulus = find_sparse_irreducible(spec.field_degree);
  const WeakDesign design(t, w);
  spec.block_sizes = design.block_sizes();
  spec.d = std::max(seed_length_bound(t, w), design.consumption());
  return spec;
}

ExtractorSpec make_extractor_spec(std::uint64_t q, std::uint64_t t, double eps_1bit) {
  if (t == 0 || q < t) throw DomainError("extractor needs q >= t >= 1");
  const std::uint64_t w = next_prime_above(2 * static_cast<std::uint64_t>(design_log_bound(q, t, eps_1bit)));
  return make_extractor_spec_for_prime(q, t, w, eps_1bit);
}

namespace {

struct SubSeedKeys {
  BinaryField::Element alpha;
  BinaryField::Element r;
};

SubSeedKeys split_subseed(const BinaryField& field, const BitVector& subseed) {
  const std::size_t eval_bits = (subseed.size() + 1) / 2;
  return {field.from_bits(subseed, 0), field.from_bits(subseed, eval_bits)};
}

}  // namespace

bool rsh_bit(const BinaryField& field, const BitVector& input, std::uint64_t q, const BitVector& subseed) {
  if (input.size() != q) throw InputError("input length differs from q");
  if (subseed.size() != 2 * std::size_t{field.degree()} + 1) {
    throw InputError("sub-seed length must be 2 l + 1");
  }
  const auto keys = split_subseed(field, subseed);
  const unsigned l = field.degree();
  BinaryField::Element y{};
  for (std::uint64_t offset = 0; offset < q; offset += l) {
    y = field.multiply(y, keys.alpha);
    const auto c = field.from_bits(input, offset);
    for (unsigned k = 0; k < field.words(); ++k) y[k] ^= c[k];
  }
  return BinaryField::inner_product(y, keys.r);
}

struct StreamingExtractor::State {
  ExtractorSpec spec;
  BinaryField field;
  std::vector<BinaryField::Element> alphas;
  std::vector<BinaryField::Element> rs;
  std::vector<BinaryField::Element> acc;
  BitVector pending;
  std::uint64_t consumed = 0;
  unsigned threads = 1;
  bool finished = false;

  State(const ExtractorSpec& s, unsigned th) : spec(s), field(s.modulus), threads(th) {}

  void absorb(const std::vector<BinaryField::Element>& blocks) {
    auto run = [&](std::size_t begin, std::size_t end) {
      field.horner(std::span(acc).subspan(begin, end - begin),
                   std::span<const BinaryField::Element>(alphas).subspan(begin, end - begin), blocks);
    };
    const std::size_t n = acc.size();
    const unsigned workers =
        static_cast<unsigned>(std::min<std::size_t>(threads, blocks.size() * n >= 4096 ? n : 1));
    if (workers <= 1) {
      run(0, n);
      return;
    }
    std::vector<std::thread> pool;
    const std::size_t per = (n + workers - 1) / workers;
    for (unsigned wkr = 0; wkr < workers; ++wkr) {
      const std::size_t begin = wkr * per;
      const std::size_t end = std::min(n, begin + per);
      if (begin >= end) break;
      pool.emplace_back(run, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  void drain(bool final_block) {
    const unsigned l = spec.field_degree;
    constexpr std::size_t kBatch = 1 << 15;
    std::size_t full = pending.size() / l;
    if (final_block && pending.size() % l != 0) ++full;
    std::size_t done = 0;
    std::vector<BinaryField::Element> blocks;
    while (done < full) {
      const std::size_t batch = std::min(kBatch, full - done);
      blocks.resize(batch);
      for (std::size_t j = 0; j < batch; ++j) blocks[j] = field.from_bits(pending, (done + j) * l);
      absorb(blocks);
      done += batch;
    }
    const std::size_t used = std::min(pending.size(), done * l);
    pending = pending.slice(used, pending.size());
  }
};

StreamingExtractor::StreamingExtractor(const ExtractorSpec& spec, const BitVector& seed, unsigned threads)
    : state_(std::make_unique<State>(spec, resolve_threads(threads))) {
  if (seed.size() != spec.d) {
    throw InputError("seed has " + std::to_string(seed.size()) + " bits, the spec needs " +
                     std::to_string(spec.d));
  }
  const WeakDesign design(spec.t, spec.w);
  if (design.block_sizes() != spec.block_sizes || spec.field_degree != spec.w / 2) {
    throw InputError("extractor spec is inconsistent with its design");
  }
  auto& st = *state_;
  st.alphas.resize(spec.t);
  st.rs.resize(spec.t);
  st.acc.assign(spec.t, BinaryField::Element{});
  for (std::uint64_t i = 0; i < spec.t; ++i) {
    BitVector subseed(spec.w);
    for (std::uint64_t a = 0; a < spec.w; ++a) subseed.set(a, seed.get(design.position(i, a)));
    const auto keys = split_subseed(st.field, subseed);
    st.alphas[i] = keys.alpha;
    st.rs[i] = keys.r;
  }
}

StreamingExtractor::~StreamingExtractor() = default;
StreamingExtractor::StreamingExtractor(StreamingExtractor&&) noexcept = default;
StreamingExtractor& StreamingExtractor::operator=(StreamingExtractor&&) noexcept = default;

void StreamingExtractor::append(const BitVector& chunk) {
  auto& st = *state_;
  if (st.finished) throw InputError("extractor already finished");
  if (chunk.size() > st.spec.q - st.consumed) throw InputError("input longer than q");
  st.pending.append(chunk);
  st.consumed += chunk.size();
  if (st.pending.size() >= st.spec.field_degree) st.drain(false);
}

std::uint64_t StreamingExtractor::consumed() const noexcept { return state_->consumed; }

BitVector StreamingExtractor::finish() {
  auto& st = *state_;
  if (st.finished) throw InputError("extractor already finished");
  if (st.consumed != st.spec.q) {
    throw InputError("input has " + std::to_string(st.consumed) + " bits, the spec needs " +
                     std::to_string(st.spec.q));
  }
  st.drain(true);
  st.finished = true;
  BitVector out(st.spec.t);
  for (std::uint64_t i = 0; i < st.spec.t; ++i) {
    out.set(i, BinaryField::inner_product(st.acc[i], st.rs[i]));
  }
  return out;
}

BitVector extract(const BitVector& input, const BitVector& seed, const ExtractorSpec& spec, unsigned threads) {
  if (input.size() != spec.q) {
    throw InputError("input has " + std::to_string(input.size()) + " bits, the spec needs " +
                     std::to_string(spec.q));
  }
  StreamingExtractor ext(spec, seed, threads);
  ext.append(input);
  return ext.finish();
}

BitVector outcome_bits(std::span<const TrialRecord> trials, std::uint64_t first_index,
                       std::optional<std::uint64_t> freeze_after) {
  BitVector out(2 * trials.size());
  for (std::size_t k = 0; k < trials.size(); ++k) {
    const std::uint64_t index = first_index + k;
    validate_trial(trials[k], index - 1);
    if (freeze_after && index > *freeze_after) continue;
    out.set(2 * k, trials[k].a != 0);
    out.set(2 * k + 1, trials[k].b != 0);
  }
  return out;
}

}  // namespace bellrand
