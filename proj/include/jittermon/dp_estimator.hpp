#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "jittermon/fixed_delay.hpp"

namespace jittermon::dp {

// Statistics of one full window of 2^m + 1 one-way delays. euclid_sq is the
// variance surrogate left unsquare-rooted (squared microseconds); manhattan
// is the mean absolute deviation (microseconds). Both divide by 2^m via
// right-shift only.
struct WindowEstimates {
  FixedDelay mean;
  uint128 euclid_sq = 0;
  FixedDelay manhattan;
};

// Mean of the most recent 2^m delays (the stored window minus its oldest
// entry), floor-divided by shift. window.size() must be 2^m + 1, oldest
// first.
FixedDelay window_mean(std::span<const FixedDelay> window, unsigned m);

// Sum over all stored delays of squared deviation from `mean`, shifted
// right by m. The accumulator is 128 bits wide, so overflow cannot occur
// for 48-bit delays.
uint128 euclid_sq(std::span<const FixedDelay> window, FixedDelay mean, unsigned m);

// Sum over all stored delays of |delay - mean|, shifted right by m.
FixedDelay manhattan_dev(std::span<const FixedDelay> window, FixedDelay mean, unsigned m);

// Ring of 2^m + 1 delays. Pushing the (2^m + 1)-th delay yields one set of
// estimates and empties the ring: windows never overlap, and the estimate
// arithmetic runs once per window.
class DelayWindow {
 public:
  explicit DelayWindow(unsigned m);  // throws std::invalid_argument unless 1 <= m <= 16

  std::optional<WindowEstimates> push(FixedDelay d);

  unsigned exponent() const { return m_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t fill() const { return slots_.size(); }

 private:
  unsigned m_;
  std::size_t capacity_;
  std::vector<FixedDelay> slots_;
};

enum class EwmaWeights {
  w7_8,    // 7/8 old + 1/8 sample
  w15_16,  // 15/16 old + 1/16 sample
};

// Exponentially weighted moving average of |consecutive delay difference|.
// State is integer microseconds with 16 fractional bits; the update is
// shift-and-subtract, so no division is performed.
class EwmaEstimator {
 public:
  explicit EwmaEstimator(EwmaWeights weights);

  // First delay only primes the previous-delay register and yields nothing.
  std::optional<double> update(FixedDelay d);

  double current() const { return static_cast<double>(current_q16_) / 65536.0; }

 private:
  unsigned shift_;
  std::uint64_t current_q16_ = 0;
  std::optional<FixedDelay> prev_;
};

}  // namespace jittermon::dp
