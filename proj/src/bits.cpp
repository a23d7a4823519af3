#include "bellrand/bits.hpp"

#include <algorithm>
#include <bit>

#include "bellrand/errors.hpp"

namespace bellrand {

BitVector BitVector::from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_count) {
  if (bytes.size() * 8 < bit_count) {
    throw InputError("byte buffer holds fewer than the requested number of bits");
  }
  BitVector out(bit_count);
  for (std::size_t byte = 0; byte * 8 < bit_count; ++byte) {
    out.words_[byte / 8] |= std::uint64_t{bytes[byte]} << (8 * (byte % 8));
  }
  if (bit_count % 64 != 0) out.words_.back() &= (std::uint64_t{1} << (bit_count % 64)) - 1;
  return out;
}

std::vector<std::uint8_t> BitVector::to_bytes() const {
  std::vector<std::uint8_t> out((size_ + 7) / 8);
  for (std::size_t byte = 0; byte < out.size(); ++byte) {
    out[byte] = static_cast<std::uint8_t>(words_[byte / 8] >> (8 * (byte % 8)));
  }
  return out;
}

void BitVector::push_back(bool value) {
  if (size_ % 64 == 0) words_.push_back(0);
  ++size_;
  if (value) set(size_ - 1, true);
}

void BitVector::append(const BitVector& other) {
  const unsigned shift = size_ % 64;
  if (shift == 0) {
    words_.insert(words_.end(), other.words_.begin(), other.words_.end());
  } else {
    for (std::uint64_t w : other.words_) {
      words_.back() |= w << shift;
      words_.push_back(w >> (64 - shift));
    }
  }
  size_ += other.size_;
  words_.resize((size_ + 63) / 64);
}

std::uint64_t BitVector::bits_at(std::size_t offset, unsigned count) const {
  if (count == 0 || offset >= size_) return 0;
  const std::size_t word = offset >> 6;
  const unsigned shift = offset & 63;
  std::uint64_t value = words_[word] >> shift;
  if (shift != 0 && word + 1 < words_.size()) value |= words_[word + 1] << (64 - shift);
  if (count < 64) value &= (std::uint64_t{1} << count) - 1;
  return value;
}

BitVector BitVector::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size_) throw InputError("bit slice out of range");
  BitVector out(end - begin);
  for (std::size_t i = 0; i < out.words_.size(); ++i) {
    const std::size_t offset = begin + 64 * i;
    out.words_[i] = bits_at(offset, static_cast<unsigned>(std::min<std::size_t>(64, end - offset)));
  }
  return out;
}

std::size_t BitVector::popcount() const {
  std::size_t total = 0;
  for (std::uint64_t w : words_) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

}  // namespace bellrand
