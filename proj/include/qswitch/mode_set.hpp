#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>

namespace qswitch {

inline constexpr std::size_t kMaxModes = 8;

/* Subset of the mode ids 0..7 as a bitmask. */
class ModeSet {
 public:
  constexpr ModeSet() = default;
  constexpr explicit ModeSet(std::uint8_t bits) : bits_(bits) {}

  static constexpr ModeSet all(std::size_t modes) {
    return ModeSet(static_cast<std::uint8_t>((1u << modes) - 1u));
  }
  static constexpr ModeSet single(std::size_t p) {
    return ModeSet(static_cast<std::uint8_t>(1u << p));
  }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(std::size_t p) const { return (bits_ >> p) & 1u; }
  constexpr void insert(std::size_t p) { bits_ |= static_cast<std::uint8_t>(1u << p); }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  /* Lowest member, or -1 when empty. */
  constexpr int lowest() const { return empty() ? -1 : std::countr_zero(bits_); }

  friend constexpr ModeSet operator|(ModeSet a, ModeSet b) {
    return ModeSet(static_cast<std::uint8_t>(a.bits_ | b.bits_));
  }
  friend constexpr ModeSet operator&(ModeSet a, ModeSet b) {
    return ModeSet(static_cast<std::uint8_t>(a.bits_ & b.bits_));
  }
  friend constexpr bool operator==(ModeSet, ModeSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

}  // namespace qswitch
