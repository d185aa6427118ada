#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "jittermon/jitter_series.hpp"
#include "jittermon/receiver_log.hpp"
#include "jittermon/sim_time.hpp"

namespace jittermon::analysis {

// Group received packets by fixed time intervals (pairs with interval
// polling) or by fixed packet count (pairs with windowed data-plane
// estimators).
struct IntervalMode {
  SimTime interval;
};
struct WindowMode {
  std::uint32_t packets = 0;
};

enum class TruthStatistic {
  mean_abs_consecutive,  // mean |d_i - d_{i-1}| within the group
  std_dev,               // sample standard deviation of delays
  sq_std_dev,            // sample variance of delays
};

struct GroundTruthConfig {
  std::variant<IntervalMode, WindowMode> mode;
  TruthStatistic statistic = TruthStatistic::mean_abs_consecutive;
};

// End-to-end jitter the receiver actually experienced, one point per group.
// Delays enter in full precision (fractional microseconds); groups too small
// for the statistic produce a gap. Values are microseconds (squared
// microseconds for sq_std_dev). Empty log -> empty series.
JitterSeries ground_truth_series(const ReceiverLog& log, const GroundTruthConfig& cfg,
                                 const std::string& label);

struct DtwResult {
  double distance = 0.0;
  double per_point = 0.0;  // distance / max(len a, len b)
};

// Classic dynamic time warping over the value sequences: |a_i - b_j| cell
// cost, full window, endpoints matched, no normalization. Timestamps are
// ignored; the two series need not be synchronized or equally long.
// Throws std::invalid_argument when either series is empty.
DtwResult dtw_distance(const JitterSeries& a, const JitterSeries& b);

struct TrendEntry {
  std::string label;
  double distance = 0.0;
};

enum class Order { strictly_less, less_equal };

// Declared ordering over run labels, e.g. {"50Mbps","90Mbps"} with
// strictly_less meaning dtw(50Mbps) < dtw(90Mbps).
struct TrendAssertion {
  std::vector<std::string> labels;
  Order order = Order::strictly_less;
};

struct TrendCheck {
  std::string expression;
  bool pass = false;
};

struct TrendReport {
  std::vector<TrendEntry> entries;
  std::vector<TrendCheck> checks;
  bool all_pass = true;
};

// Orders the runs into a comparison table and evaluates each declared
// ordering. Requires at least two runs; assertion labels must name runs.
TrendReport trend_report(const std::vector<TrendEntry>& runs,
                         const std::vector<TrendAssertion>& assertions);

std::string to_text(const TrendReport& report);

}  // namespace jittermon::analysis
