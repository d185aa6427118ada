// Acceptance suite: one criterion per section, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "jittermon/analysis.hpp"
#include "jittermon/ctrl_estimator.hpp"
#include "jittermon/dp_estimator.hpp"
#include "jittermon/errors.hpp"
#include "jittermon/scenario.hpp"
#include "jittermon/simulation.hpp"

using namespace jittermon;

namespace {

int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string title)
      : number_(number), title_(std::move(title)), started_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    if (!ok) {
      pass_ = false;
      if (!first_failure_.empty()) {
        first_failure_ += "; ";
      }
      first_failure_ += detail;
    }
  }

  void note(const std::string& text) { notes_.push_back(text); }

  double elapsed_s() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  }

  // Enforces the stated runtime bound as part of the criterion.
  void finish(double runtime_bound_s = 0.0) {
    const double t = elapsed_s();
    if (runtime_bound_s > 0.0 && t > runtime_bound_s) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "runtime %.2f s exceeds bound %.0f s", t, runtime_bound_s);
      check(false, buf);
    }
    std::printf("%s  %d: %s [%.2f s]\n", pass_ ? "PASS" : "FAIL", number_, title_.c_str(), t);
    for (const auto& n : notes_) {
      std::printf("        %s\n", n.c_str());
    }
    if (!pass_) {
      std::printf("        failure: %s\n", first_failure_.c_str());
      ++g_failures;
    }
    std::fflush(stdout);
  }

 private:
  int number_;
  std::string title_;
  bool pass_ = true;
  std::string first_failure_;
  std::vector<std::string> notes_;
  std::chrono::steady_clock::time_point started_;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// criterion 1: a clean below-bottleneck CBR flow has exactly zero jitter
// everywhere: truth, controller estimate, both window estimators and the EWMA.

scenario::ScenarioConfig zero_jitter_config() {
  scenario::ScenarioConfig cfg;
  cfg.name = "zero-jitter";
  cfg.duration = SimTime::from_s(5);
  cfg.topology = scenario::linear_topology();
  cfg.flows = {scenario::tagged_flow(90'000'000, cfg.duration)};
  cfg.monitor_flow = "tagged";
  cfg.controller = scenario::ControllerConfig{SimTime::from_s(1),
                                              analysis::TruthStatistic::mean_abs_consecutive};
  scenario::DataPlaneConfig dp;
  dp.switches = {"s2", "s3"};
  dp.window_m = {4, 5};
  dp.euclid = dp.manhattan = dp.ewma = true;
  cfg.data_plane = dp;
  return cfg;
}

void criterion_1() {
  Criterion c(1, "zero-jitter oracle: all truth and estimate series identically 0");
  const auto run = scenario::run_one(zero_jitter_config(), 1);
  c.check(run.series.size() >= 16, "expected 16 series, got " + std::to_string(run.series.size()));
  for (const auto& s : run.series) {
    c.check(!s.series.empty(), "series '" + s.series.label() + "' is empty");
    for (const auto& p : s.series.points()) {
      if (p.value != 0.0) {
        c.check(false, "series '" + s.series.label() + "' has nonzero value " +
                           std::to_string(p.value));
        break;
      }
    }
  }
  c.finish(1.0);
}

// ---------------------------------------------------------------------------
// criterion 2: the dynamic programming warping distance equals an exhaustive
// enumeration of every monotone endpoint-matched path.

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

JitterSeries as_series(const std::vector<double>& values) {
  JitterSeries s("s");
  for (std::size_t i = 0; i < values.size(); ++i) {
    s.append(SimTime::from_ms(static_cast<std::int64_t>(i + 1)), values[i]);
  }
  return s;
}

void criterion_2() {
  Criterion c(2, "DTW equals the exhaustive warping-path oracle on 200 random pairs");
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 200; ++round) {
    std::vector<double> a(1 + rng() % 6);
    std::vector<double> b(1 + rng() % 6);
    for (auto& v : a) {
      v = static_cast<double>(rng() % 64) * 0.25;
    }
    for (auto& v : b) {
      v = static_cast<double>(rng() % 64) * 0.25;
    }
    const double expect = dtw_brute(a, b);
    const double got = analysis::dtw_distance(as_series(a), as_series(b)).distance;
    if (got != expect) {
      c.check(false, fmt("pair %d: dtw %.6f != oracle %.6f", round, got, expect));
      break;
    }
  }
  c.finish(5.0);
}

// ---------------------------------------------------------------------------
// criterion 3: integer window statistics stay within the analytic floor-shift
// slack of a floating-point oracle built on the same trailing-2^m mean.

void criterion_3() {
  Criterion c(3, "fixed-point window estimates track the floating oracle within slack");
  std::mt19937_64 rng(3030);
  constexpr std::uint64_t kMaxDelay = 1'000'000;
  for (int round = 0; round < 10'000; ++round) {
    const unsigned m = 1 + static_cast<unsigned>(rng() % 5);
    const std::size_t n = (std::size_t{1} << m) + 1;
    std::vector<FixedDelay> w;
    w.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      w.emplace_back(rng() % (kMaxDelay + 1));
    }
    const double pow2m = static_cast<double>(std::uint64_t{1} << m);
    double mean_f = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      mean_f += static_cast<double>(w[i].value());
    }
    mean_f /= pow2m;
    double euclid_f = 0.0;
    double manhattan_f = 0.0;
    for (const auto d : w) {
      const double dev = std::abs(static_cast<double>(d.value()) - mean_f);
      euclid_f += dev * dev;
      manhattan_f += dev;
    }
    euclid_f /= pow2m;
    manhattan_f /= pow2m;

    const FixedDelay mean = dp::window_mean(w, m);
    const double euclid_i = u128_to_double(dp::euclid_sq(w, mean, m));
    const double manhattan_i = static_cast<double>(dp::manhattan_dev(w, mean, m).value());
    const double nd = static_cast<double>(n);
    if (std::abs(manhattan_i - manhattan_f) > nd) {
      c.check(false, fmt("manhattan off by %.3f > n=%.0f", std::abs(manhattan_i - manhattan_f), nd));
      break;
    }
    if (std::abs(euclid_i - euclid_f) > nd * static_cast<double>(kMaxDelay)) {
      c.check(false, fmt("euclid off by %.3f > n*max=%.0f", std::abs(euclid_i - euclid_f),
                         nd * static_cast<double>(kMaxDelay)));
      break;
    }
  }
  c.finish(10.0);
}

// ---------------------------------------------------------------------------
// trend batches (criteria 4-6, reused by 8 and 9)

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

scenario::ScenarioConfig dp_combined_config() {
  auto cfg = scenario::builtin_scenario("dp-euclid-17");
  cfg.name = "dp-combined";
  cfg.data_plane->window_m = {4, 5};
  cfg.data_plane->euclid = true;
  cfg.data_plane->manhattan = true;
  return cfg;
}

void check_conservation(Criterion& c, const scenario::BatchResult& batch) {
  for (const auto& run : batch.runs) {
    for (const auto& [flow, st] : run.flow_stats) {
      if (st.sent != st.received + st.dropped) {
        c.check(false, batch.scenario + " seed " + std::to_string(run.seed) + " flow " + flow +
                           ": sent != received + dropped");
        return;
      }
    }
  }
}

void criterion_4_5_6_8_9() {
  // Run the batches once, score several criteria from them.
  auto batch50 = scenario::run_batch(scenario::builtin_scenario("single-flow-50"), kSeeds);
  auto batch90 = scenario::run_batch(scenario::builtin_scenario("single-flow-90"), kSeeds);
  auto batch100 = scenario::run_batch(scenario::builtin_scenario("single-flow-100"), kSeeds);
  auto batch_dp = scenario::run_batch(dp_combined_config(), kSeeds);

  {
    Criterion c(4, "utilization trend: mean controller DTW 50 < 90 < 100 Mbps over 10 seeds");
    const double d50 = scenario::mean_dtw(batch50, "ctrl_estimate");
    const double d90 = scenario::mean_dtw(batch90, "ctrl_estimate");
    const double d100 = scenario::mean_dtw(batch100, "ctrl_estimate");
    c.note(fmt("mean DTW: 50 Mbps %.1f, 90 Mbps %.1f, 100 Mbps %.1f", d50, d90, d100));
    c.check(d50 < d90 && d90 < d100, fmt("ordering violated: %.1f, %.1f, %.1f", d50, d90, d100));
    c.finish();
  }
  {
    Criterion c(5, "hop-position trend: mean DTW at s3 <= s2 for euclid and manhattan");
    for (const char* est : {"euclid", "manhattan"}) {
      for (const char* n : {"17", "33"}) {
        const double s2 = scenario::mean_dtw(batch_dp, std::string(est) + "_s2_w" + n);
        const double s3 = scenario::mean_dtw(batch_dp, std::string(est) + "_s3_w" + n);
        c.note(fmt((std::string(est) + " w" + n + ": s3 %.1f vs s2 %.1f").c_str(), s3, s2));
        c.check(s3 <= s2, std::string(est) + " w" + n + ": s3 > s2");
      }
    }
    c.finish();
  }
  {
    Criterion c(6, "window-size trend: mean DTW with 33-packet windows <= 17-packet windows");
    for (const char* est : {"euclid", "manhattan"}) {
      for (const char* sw : {"s2", "s3"}) {
        const double w17 = scenario::mean_dtw(batch_dp, std::string(est) + "_" + sw + "_w17");
        const double w33 = scenario::mean_dtw(batch_dp, std::string(est) + "_" + sw + "_w33");
        c.note(fmt((std::string(est) + " " + sw + ": w33 %.1f vs w17 %.1f").c_str(), w33, w17));
        c.check(w33 <= w17, std::string(est) + " at " + sw + ": w33 > w17");
      }
    }
    c.finish();
  }
  {
    Criterion c(8, "simulator conservation, counter consistency and determinism");
    for (const auto* batch : {&batch50, &batch90, &batch100, &batch_dp}) {
      check_conservation(c, *batch);
    }
    // Counter consistency after drain, one direct run per scenario shape.
    for (const char* name : {"single-flow-50", "single-flow-100"}) {
      const auto cfg = scenario::builtin_scenario(name);
      const auto out = sim::run_scenario(cfg.topology, cfg.flows, 1, cfg.duration);
      for (const auto& l : cfg.topology.links) {
        const bool ab = out.final_counter(l.a.node, l.a.port, Direction::tx) ==
                        out.final_counter(l.b.node, l.b.port, Direction::rx);
        const bool ba = out.final_counter(l.b.node, l.b.port, Direction::tx) ==
                        out.final_counter(l.a.node, l.a.port, Direction::rx);
        c.check(ab && ba, std::string(name) + ": link " + l.a.node + "-" + l.b.node +
                              " counters inconsistent after drain");
      }
      for (const auto& [flow, st] : out.all_stats()) {
        c.check(st.sent == st.received + st.dropped,
                std::string(name) + " flow " + flow + ": conservation violated");
      }
    }
    // Determinism: identical inputs and seed give byte-identical output.
    const auto cfg90 = scenario::builtin_scenario("single-flow-90");
    const auto run_a = sim::run_scenario(cfg90.topology, cfg90.flows, 1, cfg90.duration);
    const auto run_b = sim::run_scenario(cfg90.topology, cfg90.flows, 1, cfg90.duration);
    c.check(run_a.serialize() == run_b.serialize(),
            "same-seed reruns of single-flow-90 differ");
    c.finish();
  }
  {
    Criterion c(9, "saturated 100 Mbps scenario records packet drops in every run");
    for (const auto& run : batch100.runs) {
      std::uint64_t total = 0;
      for (const auto& [flow, st] : run.flow_stats) {
        total += st.dropped;
      }
      c.check(total > 0, "seed " + std::to_string(run.seed) + " recorded no drops");
      c.check(run.flow_stats.at("tagged").dropped > 0,
              "seed " + std::to_string(run.seed) + ": monitored flow lost no packets");
    }
    c.finish();
  }
}

// ---------------------------------------------------------------------------
// criterion 7: controller estimator invariants

void criterion_7() {
  Criterion c(7, "controller invariants: shift invariance, degraded gaps, rate reciprocity");
  std::mt19937_64 rng(7077);

  // Shift invariance of the difference statistic: constant offsets cancel.
  std::vector<double> sums;
  for (int i = 0; i < 500; ++i) {
    sums.push_back(static_cast<double>(rng() % 4096) / 16.0);
  }
  for (std::size_t i = 1; i < sums.size(); ++i) {
    const auto base = ctrl::jitter_estimate_step(sums[i - 1], sums[i]);
    const auto shifted = ctrl::jitter_estimate_step(sums[i - 1] + 1024.0, sums[i] + 1024.0);
    if (*base != *shifted) {
      c.check(false, "shift invariance violated");
      break;
    }
  }

  // Degraded rounds leave gaps, clean neighbours resume.
  {
    ctrl::PollConfig pc;
    pc.interval = SimTime::from_s(1);
    pc.path_ports = {{"s1", 1, Direction::rx}, {"s1", 2, Direction::tx}};
    ctrl::ControllerEstimator est(pc, "e");
    auto observe = [&](std::int64_t t, std::uint64_t c1, std::uint64_t c2) {
      est.observe({{"s1", 1, Direction::rx, c1, SimTime::from_s(t)},
                   {"s1", 2, Direction::tx, c2, SimTime::from_s(t)}},
                  SimTime::from_s(t));
    };
    observe(1, 10, 10);
    observe(2, 20, 20);
    observe(3, 20, 30);  // idle port -> degraded
    observe(4, 30, 40);
    observe(5, 40, 50);
    c.check(est.rounds().size() == 5, "expected 5 rounds");
    c.check(est.rounds()[2].degraded, "round 2 should be degraded");
    c.check(est.estimate().size() == 2, "expected exactly 2 estimate points around the gap");
  }

  // per_packet_time x rate == 1 whenever traffic flowed.
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t a = rng() % 1'000'000;
    const std::uint64_t b = a + 1 + rng() % 1'000'000;
    const auto t0 = SimTime::from_ms(static_cast<std::int64_t>(rng() % 100'000));
    const auto t1 = t0 + SimTime::from_ms(1 + static_cast<std::int64_t>(rng() % 10'000));
    const PortCounterSample prev{"s", 1, Direction::tx, a, t0};
    const PortCounterSample curr{"s", 1, Direction::tx, b, t1};
    const double product = *ctrl::per_packet_time(prev, curr) * ctrl::rate(prev, curr);
    if (std::abs(product - 1.0) > 1e-12) {
      c.check(false, fmt("ppt*rate = %.15f deviates beyond 1e-12", product));
      break;
    }
  }
  c.finish(1.0);
}

}  // namespace

int main() {
  std::printf("jittermon acceptance suite\n");
  const auto started = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_7();
  criterion_4_5_6_8_9();
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::printf("%d criterion failure(s), %.1f s total\n", g_failures, total);
  return g_failures;
}
