#include "jittermon/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>

#include "jittermon/errors.hpp"

namespace jittermon::analysis {

namespace {

double delay_us(const ReceiverEntry& e) {
  return static_cast<double>((e.received_at - e.sent_at).ns()) / 1000.0;
}

// Statistic over one group of consecutive receiver entries, or nullopt when
// the group is too small to support it.
std::optional<double> group_statistic(const std::vector<ReceiverEntry>& entries, std::size_t first,
                                      std::size_t last, TruthStatistic stat) {
  const std::size_t count = last - first;
  if (count < 2) {
    return std::nullopt;
  }
  switch (stat) {
    case TruthStatistic::mean_abs_consecutive: {
      double acc = 0.0;
      for (std::size_t i = first + 1; i < last; ++i) {
        acc += std::abs(delay_us(entries[i]) - delay_us(entries[i - 1]));
      }
      return acc / static_cast<double>(count - 1);
    }
    case TruthStatistic::std_dev:
    case TruthStatistic::sq_std_dev: {
      double mean = 0.0;
      for (std::size_t i = first; i < last; ++i) {
        mean += delay_us(entries[i]);
      }
      mean /= static_cast<double>(count);
      double var = 0.0;
      for (std::size_t i = first; i < last; ++i) {
        const double dev = delay_us(entries[i]) - mean;
        var += dev * dev;
      }
      var /= static_cast<double>(count - 1);
      return stat == TruthStatistic::sq_std_dev ? var : std::sqrt(var);
    }
  }
  return std::nullopt;
}

}  // namespace

JitterSeries ground_truth_series(const ReceiverLog& log, const GroundTruthConfig& cfg,
                                 const std::string& label) {
  JitterSeries series(label);
  const auto& entries = log.entries;
  if (entries.empty()) {
    return series;
  }
  if (const auto* iv = std::get_if<IntervalMode>(&cfg.mode)) {
    if (iv->interval <= SimTime{}) {
      throw config_error("ground truth: interval must be > 0");
    }
    // Group by poll interval ((r-1)T, rT]; points sit at interval ends.
    std::size_t i = 0;
    for (std::int64_t r = 1; i < entries.size(); ++r) {
      const SimTime end = iv->interval * r;
      std::size_t first = i;
      while (i < entries.size() && entries[i].received_at <= end) {
        ++i;
      }
      if (auto v = group_statistic(entries, first, i, cfg.statistic)) {
        series.append(end, *v);
      }
    }
  } else {
    const auto& wm = std::get<WindowMode>(cfg.mode);
    if (wm.packets < 2) {
      throw config_error("ground truth: window must cover at least 2 packets");
    }
    for (std::size_t first = 0; first + wm.packets <= entries.size(); first += wm.packets) {
      const std::size_t last = first + wm.packets;
      if (auto v = group_statistic(entries, first, last, cfg.statistic)) {
        series.append(entries[last - 1].received_at, *v);
      }
    }
  }
  return series;
}

DtwResult dtw_distance(const JitterSeries& a, const JitterSeries& b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("dtw: series must be non-empty");
  }
  const auto& pa = a.points();
  const auto& pb = b.points();
  const std::size_t n = pa.size();
  const std::size_t m = pb.size();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // Rolling rows over the full alignment matrix.
  std::vector<double> prev(m + 1, kInf);
  std::vector<double> curr(m + 1, kInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    curr[0] = kInf;
    for (std::size_t j = 1; j <= m; ++j) {
      const double cost = std::abs(pa[i - 1].value - pb[j - 1].value);
      curr[j] = cost + std::min({prev[j], curr[j - 1], prev[j - 1]});
    }
    std::swap(prev, curr);
  }
  DtwResult out;
  out.distance = prev[m];
  out.per_point = out.distance / static_cast<double>(std::max(n, m));
  return out;
}

TrendReport trend_report(const std::vector<TrendEntry>& runs,
                         const std::vector<TrendAssertion>& assertions) {
  if (runs.size() < 2) {
    throw std::invalid_argument("trend report needs at least two runs");
  }
  std::map<std::string, double> by_label;
  for (const auto& r : runs) {
    by_label[r.label] = r.distance;
  }
  TrendReport report;
  report.entries = runs;
  for (const auto& a : assertions) {
    if (a.labels.size() < 2) {
      throw std::invalid_argument("trend assertion needs at least two labels");
    }
    TrendCheck check;
    check.pass = true;
    const char* op = a.order == Order::strictly_less ? " < " : " <= ";
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
      const auto it = by_label.find(a.labels[i]);
      if (it == by_label.end()) {
        throw std::invalid_argument("trend assertion names unknown run '" + a.labels[i] + "'");
      }
      if (i > 0) {
        check.expression += op;
        const double lhs = by_label.at(a.labels[i - 1]);
        const double rhs = it->second;
        check.pass &= a.order == Order::strictly_less ? lhs < rhs : lhs <= rhs;
      }
      check.expression += a.labels[i];
    }
    report.all_pass &= check.pass;
    report.checks.push_back(std::move(check));
  }
  return report;
}

std::string to_text(const TrendReport& report) {
  std::string out;
  out += "run                                distance\n";
  for (const auto& e : report.entries) {
    char line[128];
    std::snprintf(line, sizeof line, "%-32s %14.3f\n", e.label.c_str(), e.distance);
    out += line;
  }
  for (const auto& c : report.checks) {
    out += c.pass ? "PASS  " : "FAIL  ";
    out += c.expression;
    out += '\n';
  }
  return out;
}

}  // namespace jittermon::analysis
