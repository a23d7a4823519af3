#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace bellrand {

/// Packed bit sequence. Bit i lives in word i / 64 at position i % 64, and in
/// byte form at byte i / 8, position i % 8 (little-endian bit order).
/// Bits past size() are kept zero.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : words_((size + 63) / 64, 0), size_(size) {}

  static BitVector from_bytes(std::span<const std::uint8_t> bytes, std::size_t bit_count);
  std::vector<std::uint8_t> to_bytes() const;

  std::size_t size() const noexcept { return size_; }
  bool empty() const noexcept { return size_ == 0; }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  bool operator[](std::size_t i) const { return get(i); }
  void set(std::size_t i, bool value) {
    const std::uint64_t bit = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= bit;
    } else {
      words_[i >> 6] &= ~bit;
    }
  }

  void push_back(bool value);
  void append(const BitVector& other);
  void clear() noexcept {
    words_.clear();
    size_ = 0;
  }

  /// `count` bits (at most 64) starting at `offset`; positions past size() read as 0.
  std::uint64_t bits_at(std::size_t offset, unsigned count) const;

  /// Copy of bits [begin, end).
  BitVector slice(std::size_t begin, std::size_t end) const;

  std::size_t popcount() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const BitVector& a, const BitVector& b) {
    return a.size_ == b.size_ && a.words_ == b.words_;
  }

 private:
  std::vector<std::uint64_t> words_;
  std::size_t size_ = 0;
};

}  // namespace bellrand
