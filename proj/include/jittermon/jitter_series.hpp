#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "jittermon/sim_time.hpp"

namespace jittermon {

struct SeriesPoint {
  SimTime at;
  double value = 0.0;
};

// An ordered (time, value) sequence: a jitter estimate stream or a
// ground-truth stream. Values are finite and non-negative, timestamps
// strictly increase.
class JitterSeries {
 public:
  JitterSeries() = default;
  explicit JitterSeries(std::string label) : label_(std::move(label)) {}

  void append(SimTime at, double value) {
    if (!std::isfinite(value) || value < 0.0) {
      throw std::invalid_argument("JitterSeries '" + label_ + "': value must be finite and >= 0");
    }
    if (!points_.empty() && at <= points_.back().at) {
      throw std::invalid_argument("JitterSeries '" + label_ + "': timestamps must strictly increase");
    }
    points_.push_back({at, value});
  }

  const std::string& label() const { return label_; }
  const std::vector<SeriesPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

 private:
  std::string label_;
  std::vector<SeriesPoint> points_;
};

}  // namespace jittermon
