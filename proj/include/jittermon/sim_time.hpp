#pragma once

#include <compare>
#include <cstdint>

namespace jittermon {

// Simulation clock: integer nanoseconds since simulation start. Also used
// for durations, so the value is signed; negative instants never occur in
// a running simulation.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime(ns); }
  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us * 1000); }
  static constexpr SimTime from_ms(std::int64_t ms) { return SimTime(ms * 1'000'000); }
  static constexpr SimTime from_s(std::int64_t s) { return SimTime(s * 1'000'000'000); }

  constexpr std::int64_t ns() const { return ns_; }
  // Floor to whole microseconds; callers truncating to switch timestamp
  // granularity go through here.
  constexpr std::int64_t us_floor() const { return ns_ / 1000; }
  constexpr double seconds() const { return static_cast<double>(ns_) / 1e9; }

  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime(a.ns_ + b.ns_); }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime(a.ns_ - b.ns_); }
  constexpr SimTime& operator+=(SimTime o) {
    ns_ += o.ns_;
    return *this;
  }
  friend constexpr SimTime operator*(SimTime a, std::int64_t k) { return SimTime(a.ns_ * k); }

  friend constexpr auto operator<=>(SimTime, SimTime) = default;

 private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

}  // namespace jittermon
