#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace distillfuzz {

// FNV-1a, 32 and 64 bit. Byte order is fixed (little-endian packing in the
// helpers below) so hashes are identical across hosts.
class Fnv1a32 {
 public:
  static constexpr std::uint32_t kOffset = 2166136261u;
  static constexpr std::uint32_t kPrime = 16777619u;

  constexpr void byte(std::uint8_t b) {
    h_ ^= b;
    h_ *= kPrime;
  }
  constexpr void bytes(std::span<const std::uint8_t> data) {
    for (auto b : data) byte(b);
  }
  constexpr std::uint32_t value() const { return h_; }

 private:
  std::uint32_t h_ = kOffset;
};

class Fnv1a64 {
 public:
  static constexpr std::uint64_t kOffset = 14695981039346656037ull;
  static constexpr std::uint64_t kPrime = 1099511628211ull;

  constexpr void byte(std::uint8_t b) {
    h_ ^= b;
    h_ *= kPrime;
  }
  constexpr void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  constexpr void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  constexpr void str(std::string_view s) {
    for (char c : s) byte(static_cast<std::uint8_t>(c));
  }
  constexpr std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = kOffset;
};

inline constexpr std::uint32_t fnv1a32(std::span<const std::uint8_t> data) {
  Fnv1a32 h;
  h.bytes(data);
  return h.value();
}

}  // namespace distillfuzz
