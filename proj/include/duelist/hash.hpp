#pragma once

#include <bit>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <string_view>

namespace duelist {

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Word-at-a-time streaming hash. Two hashers with different seeds give the
// independent hash/checksum pair used by the transposition table.
class Hasher {
 public:
  explicit constexpr Hasher(std::uint64_t seed) : h_(mix64(seed)) {}

  template <std::integral T>
  constexpr void add(T v) {
    word(static_cast<std::uint64_t>(v));
  }
  void add(double v) { word(std::bit_cast<std::uint64_t>(v)); }
  void add(std::string_view s) {
    word(s.size());
    std::size_t i = 0;
    for (; i + 8 <= s.size(); i += 8) {
      std::uint64_t w;
      std::memcpy(&w, s.data() + i, 8);
      word(w);
    }
    std::uint64_t tail = 0;
    std::memcpy(&tail, s.data() + i, s.size() - i);
    word(tail);
  }

  constexpr std::uint64_t digest() const { return mix64(h_ + 0x9e3779b97f4a7c15ULL); }

 private:
  constexpr void word(std::uint64_t w) { h_ = mix64(h_ ^ (w + 0x9e3779b97f4a7c15ULL + (h_ << 6))); }
  std::uint64_t h_;
};

}  // namespace duelist
