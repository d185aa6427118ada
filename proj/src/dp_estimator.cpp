#include "jittermon/dp_estimator.hpp"

#include <stdexcept>

namespace jittermon::dp {

namespace {

void check_window(std::span<const FixedDelay> window, unsigned m) {
  if (m < 1 || m > 16) {
    throw std::invalid_argument("window exponent must be in [1, 16]");
  }
  if (window.size() != (std::size_t{1} << m) + 1) {
    throw std::invalid_argument("window must hold exactly 2^m + 1 delays");
  }
}

}  // namespace

FixedDelay window_mean(std::span<const FixedDelay> window, unsigned m) {
  check_window(window, m);
  uint128 sum = 0;  // accumulator register wider than the value type
  for (std::size_t i = 1; i < window.size(); ++i) {
    sum += window[i].value();
  }
  // Mean of 2^m values each < 2^48 shifts back below 2^48 exactly.
  return FixedDelay{static_cast<std::uint64_t>(sum >> m)};
}

uint128 euclid_sq(std::span<const FixedDelay> window, FixedDelay mean, unsigned m) {
  check_window(window, m);
  uint128 acc = 0;
  for (const FixedDelay d : window) {
    const std::uint64_t dev = fixed_sub_abs(d, mean).value();
    acc += static_cast<uint128>(dev) * dev;
  }
  return acc >> m;
}

FixedDelay manhattan_dev(std::span<const FixedDelay> window, FixedDelay mean, unsigned m) {
  check_window(window, m);
  uint128 acc = 0;
  for (const FixedDelay d : window) {
    acc += fixed_sub_abs(d, mean).value();
  }
  // Deviations from the window mean cancel enough that the shifted sum
  // stays within 48 bits (worst case max/2 + max/2^m).
  return FixedDelay{static_cast<std::uint64_t>(acc >> m)};
}

DelayWindow::DelayWindow(unsigned m) : m_(m), capacity_((std::size_t{1} << m) + 1) {
  if (m < 1 || m > 16) {
    throw std::invalid_argument("window exponent must be in [1, 16]");
  }
  slots_.reserve(capacity_);
}

std::optional<WindowEstimates> DelayWindow::push(FixedDelay d) {
  slots_.push_back(d);
  if (slots_.size() < capacity_) {
    return std::nullopt;
  }
  WindowEstimates est;
  est.mean = window_mean(slots_, m_);
  est.euclid_sq = euclid_sq(slots_, est.mean, m_);
  est.manhattan = manhattan_dev(slots_, est.mean, m_);
  slots_.clear();
  return est;
}

EwmaEstimator::EwmaEstimator(EwmaWeights weights)
    : shift_(weights == EwmaWeights::w7_8 ? 3 : 4) {}

std::optional<double> EwmaEstimator::update(FixedDelay d) {
  if (!prev_) {
    prev_ = d;
    return std::nullopt;
  }
  const std::uint64_t sample_q16 = fixed_sub_abs(d, *prev_).value() << 16;
  prev_ = d;
  current_q16_ = current_q16_ - (current_q16_ >> shift_) + (sample_q16 >> shift_);
  return current();
}

}  // namespace jittermon::dp
