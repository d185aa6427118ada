#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>

namespace jittermon {

using uint128 = unsigned __int128;

inline double u128_to_double(uint128 v) {
  return static_cast<double>(v);
}

// One-way delay as a switch data plane sees it: unsigned whole microseconds,
// 48 bits wide. The only arithmetic offered is absolute difference and
// right-shift; general division, modulo and square root intentionally do
// not exist on this type, matching the register ALUs the estimators target.
class FixedDelay {
 public:
  static constexpr std::uint64_t kMaxMicros = (std::uint64_t{1} << 48) - 1;

  constexpr FixedDelay() = default;
  constexpr explicit FixedDelay(std::uint64_t micros) : micros_(micros) {
    if (micros > kMaxMicros) {
      throw std::overflow_error("FixedDelay: value exceeds 48 bits");
    }
  }

  constexpr std::uint64_t value() const { return micros_; }

  friend constexpr auto operator<=>(FixedDelay, FixedDelay) = default;

 private:
  std::uint64_t micros_ = 0;
};

// |a - b|, exact. Subtraction that would wrap is never performed.
constexpr FixedDelay fixed_sub_abs(FixedDelay a, FixedDelay b) {
  return FixedDelay(a.value() >= b.value() ? a.value() - b.value() : b.value() - a.value());
}

// floor(a / 2^m), the only division the estimators are allowed.
constexpr FixedDelay fixed_shr(FixedDelay a, unsigned m) {
  assert(m <= 16);
  return FixedDelay(a.value() >> m);
}

}  // namespace jittermon
