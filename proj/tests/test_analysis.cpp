#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "jittermon/analysis.hpp"
#include "jittermon/errors.hpp"

using namespace jittermon;
using namespace jittermon::analysis;

namespace {

ReceiverLog log_from_delays_us(const std::vector<double>& delays_us, SimTime spacing) {
  ReceiverLog log;
  log.flow = "tagged";
  SimTime sent;
  for (std::size_t i = 0; i < delays_us.size(); ++i) {
    sent += spacing;
    const SimTime recv = sent + SimTime::from_ns(static_cast<std::int64_t>(delays_us[i] * 1000));
    log.entries.push_back({i, sent, recv});
  }
  return log;
}

JitterSeries series_of(const std::vector<double>& values) {
  JitterSeries s("s");
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.append(SimTime::from_ms(static_cast<std::int64_t>(i + 1)), values[i]);
  }
  return s;
}

// Exhaustive minimum over every monotone, endpoint-matched warping path.
double dtw_brute(const std::vector<double>& a, const std::vector<double>& b, std::size_t i = 0,
                 std::size_t j = 0) {
  const double cost = std::abs(a[i] - b[j]);
  if (i + 1 == a.size() && j + 1 == b.size()) {
    return cost;
  }
  double best = std::numeric_limits<double>::infinity();
  if (i + 1 < a.size()) {
    best = std::min(best, dtw_brute(a, b, i + 1, j));
  }
  if (j + 1 < b.size()) {
    best = std::min(best, dtw_brute(a, b, i, j + 1));
  }
  if (i + 1 < a.size() && j + 1 < b.size()) {
    best = std::min(best, dtw_brute(a, b, i + 1, j + 1));
  }
  return cost + best;
}

}  // namespace

TEST_CASE("ground truth of constant delays is identically zero in every mode") {
  const auto log = log_from_delays_us(std::vector<double>(60, 464.0), SimTime::from_ms(10));
  for (const auto stat :
       {TruthStatistic::mean_abs_consecutive, TruthStatistic::std_dev, TruthStatistic::sq_std_dev}) {
    const auto interval =
        ground_truth_series(log, {IntervalMode{SimTime::from_ms(100)}, stat}, "t");
    CHECK(interval.size() > 0);
    for (const auto& p : interval.points()) {
      CHECK(p.value == 0.0);
    }
    const auto window = ground_truth_series(log, {WindowMode{17}, stat}, "t");
    CHECK(window.size() == 3);
    for (const auto& p : window.points()) {
      CHECK(p.value == 0.0);
    }
  }
}

TEST_CASE("window-mode variance matches the textbook example") {
  const auto log = log_from_delays_us({100.0, 200.0, 300.0}, SimTime::from_ms(1));
  const auto sq = ground_truth_series(log, {WindowMode{3}, TruthStatistic::sq_std_dev}, "t");
  REQUIRE(sq.size() == 1);
  CHECK(sq.points()[0].value == doctest::Approx(10000.0));

  const auto sd = ground_truth_series(log, {WindowMode{3}, TruthStatistic::std_dev}, "t");
  REQUIRE(sd.size() == 1);
  CHECK(sd.points()[0].value == doctest::Approx(100.0));
}

TEST_CASE("window-mode sq_std_dev equals std_dev squared point for point") {
  std::mt19937_64 rng(41);
  std::vector<double> delays;
  for (int i = 0; i < 200; ++i) {
    delays.push_back(static_cast<double>(rng() % 5000));
  }
  const auto log = log_from_delays_us(delays, SimTime::from_ms(1));
  const auto sd = ground_truth_series(log, {WindowMode{17}, TruthStatistic::std_dev}, "t");
  const auto sq = ground_truth_series(log, {WindowMode{17}, TruthStatistic::sq_std_dev}, "t");
  REQUIRE(sd.size() == sq.size());
  for (std::size_t i = 0; i < sd.size(); ++i) {
    CHECK(sq.points()[i].value ==
          doctest::Approx(sd.points()[i].value * sd.points()[i].value).epsilon(1e-12));
  }
}

TEST_CASE("interval-mode mean of consecutive differences, gaps for sparse intervals") {
  // One interval holding delays 10, 12, 11 ms -> mean(|2|, |1|) = 1.5 ms.
  const auto log = log_from_delays_us({10000.0, 12000.0, 11000.0}, SimTime::from_ms(100));
  const auto t = ground_truth_series(
      log, {IntervalMode{SimTime::from_s(1)}, TruthStatistic::mean_abs_consecutive}, "t");
  REQUIRE(t.size() == 1);
  CHECK(t.points()[0].value == doctest::Approx(1500.0));
  CHECK(t.points()[0].at == SimTime::from_s(1));

  // Spread the same packets one per interval: no interval has 2 packets.
  const auto sparse = log_from_delays_us({10000.0, 12000.0, 11000.0}, SimTime::from_s(2));
  const auto gaps = ground_truth_series(
      sparse, {IntervalMode{SimTime::from_s(1)}, TruthStatistic::mean_abs_consecutive}, "t");
  CHECK(gaps.empty());
}

TEST_CASE("ground truth of an empty log is empty") {
  ReceiverLog log;
  log.flow = "tagged";
  const auto t = ground_truth_series(
      log, {IntervalMode{SimTime::from_s(1)}, TruthStatistic::mean_abs_consecutive}, "t");
  CHECK(t.empty());
}

TEST_CASE("dtw of identical series is zero") {
  const auto a = series_of({1.0, 5.0, 2.0, 8.0});
  CHECK(dtw_distance(a, a).distance == 0.0);
}

TEST_CASE("dtw of flat offset series has pure pointwise cost") {
  const auto a = series_of({0.0, 0.0, 0.0});
  const auto b = series_of({1.0, 1.0, 1.0});
  const auto r = dtw_distance(a, b);
  CHECK(r.distance == doctest::Approx(3.0));
  CHECK(r.per_point == doctest::Approx(1.0));
}

TEST_CASE("dtw rejects empty input") {
  JitterSeries empty("e");
  CHECK_THROWS_AS(dtw_distance(empty, series_of({1.0})), std::invalid_argument);
}

TEST_CASE("dtw equals the exhaustive warping-path oracle on short series") {
  std::mt19937_64 rng(42);
  for (int round = 0; round < 300; ++round) {
    const std::size_t na = 1 + rng() % 6;
    const std::size_t nb = 1 + rng() % 6;
    std::vector<double> a(na);
    std::vector<double> b(nb);
    for (auto& v : a) {
      v = static_cast<double>(rng() % 64) * 0.25;
    }
    for (auto& v : b) {
      v = static_cast<double>(rng() % 64) * 0.25;
    }
    const double expect = dtw_brute(a, b);
    CHECK(dtw_distance(series_of(a), series_of(b)).distance == expect);
  }
}

TEST_CASE("dtw is symmetric and bounded by the L1 distance at equal length") {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 200; ++round) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<double> a(n);
    std::vector<double> b(n);
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng() % 1000);
      b[i] = static_cast<double>(rng() % 1000);
      l1 += std::abs(a[i] - b[i]);
    }
    const auto sa = series_of(a);
    const auto sb = series_of(b);
    const double ab = dtw_distance(sa, sb).distance;
    CHECK(ab == dtw_distance(sb, sa).distance);
    CHECK(ab >= 0.0);
    CHECK(ab <= l1);
  }
}

TEST_CASE("trend report upholds declared orderings") {
  const std::vector<TrendEntry> runs = {
      {"50Mbps", 201.516}, {"90Mbps", 327.206}, {"100Mbps", 345.85}};
  const auto report =
      trend_report(runs, {{{"50Mbps", "90Mbps", "100Mbps"}, Order::strictly_less}});
  REQUIRE(report.checks.size() == 1);
  CHECK(report.checks[0].pass);
  CHECK(report.all_pass);
  CHECK(report.checks[0].expression == "50Mbps < 90Mbps < 100Mbps");
}

TEST_CASE("trend report: closer hop wins, equal distances fail strict order") {
  const auto hop = trend_report({{"S2", 125805.0}, {"S3", 123340.37}},
                                {{{"S3", "S2"}, Order::less_equal}});
  CHECK(hop.all_pass);

  const auto equal = trend_report({{"a", 5.0}, {"b", 5.0}}, {{{"a", "b"}, Order::strictly_less}});
  CHECK_FALSE(equal.all_pass);

  CHECK_THROWS_AS(trend_report({{"only", 1.0}}, {}), std::invalid_argument);
  CHECK_THROWS_AS(trend_report({{"a", 1.0}, {"b", 2.0}}, {{{"a", "zzz"}, Order::less_equal}}),
                  std::invalid_argument);
}

TEST_CASE("trend report text carries one verdict per check") {
  const auto report = trend_report({{"a", 1.0}, {"b", 2.0}, {"c", 1.5}},
                                   {{{"a", "b"}, Order::strictly_less},
                                    {{"b", "c"}, Order::less_equal}});
  const auto text = to_text(report);
  CHECK(text.find("PASS  a < b") != std::string::npos);
  CHECK(text.find("FAIL  b <= c") != std::string::npos);
}
