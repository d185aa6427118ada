#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "jittermon/analysis.hpp"
#include "jittermon/dp_estimator.hpp"
#include "jittermon/flow.hpp"
#include "jittermon/jitter_series.hpp"
#include "jittermon/simulation.hpp"
#include "jittermon/topology.hpp"

namespace jittermon::scenario {

struct ControllerConfig {
  SimTime poll_interval = SimTime::from_s(1);
  analysis::TruthStatistic truth_statistic = analysis::TruthStatistic::mean_abs_consecutive;
};

struct DataPlaneConfig {
  std::vector<std::string> switches;
  std::vector<unsigned> window_m;
  bool euclid = false;
  bool manhattan = false;
  bool ewma = false;
  dp::EwmaWeights ewma_weights = dp::EwmaWeights::w7_8;
};

struct ScenarioConfig {
  std::string name = "custom";
  Topology topology;
  std::vector<FlowSpec> flows;
  std::string monitor_flow;
  SimTime duration;
  std::vector<std::uint64_t> seeds{1};
  std::optional<ControllerConfig> controller;
  std::optional<DataPlaneConfig> data_plane;

  void validate() const;  // throws config_error
};

// Parses the versioned key/value scenario schema (JSON syntax, documented in
// the README). Unknown keys are rejected; diagnostics name the offending key
// and, where determinable, its line.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig parse_config_file(const std::filesystem::path& path);

// Packaged experiment setups on the three-switch line. Throws config_error
// for unknown names.
ScenarioConfig builtin_scenario(std::string_view name);
std::vector<std::string> builtin_names();

// Pieces of the builtin setup, reusable for custom configurations: the
// h1-s1-s2-s3-h3 line with four cross-traffic hosts, one background flow per
// trunk link with burst rates drawn from [rate_min, rate_max], and the
// monitored flow.
Topology linear_topology();
std::vector<FlowSpec> default_cross_flows(SimTime stop, std::uint64_t rate_min_bps,
                                          std::uint64_t rate_max_bps);
FlowSpec tagged_flow(std::uint64_t rate_bps, SimTime stop);

struct SeriesOut {
  JitterSeries series;
  std::string unit;
};

struct DtwRow {
  std::string estimate_label;
  std::string truth_label;
  analysis::DtwResult result;
};

struct RunOptions {
  // When set, the run streams its debug event records to this file.
  std::optional<std::filesystem::path> events_path;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<SeriesOut> series;
  std::vector<DtwRow> dtw;
  std::map<std::string, sim::FlowStats> flow_stats;
};

RunResult run_one(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opt = {});

struct BatchResult {
  std::string scenario;
  std::vector<RunResult> runs;  // one per seed, in seed order
};

// Runs every seed (in parallel up to `jobs` simulators, one engine each) and
// collects results in seed order. When `events_dir` is set, every run streams
// its event records to <events_dir>/events-seed-<n>.log. `progress`
// (optional) fires once per finished run, serialized across workers.
BatchResult run_batch(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                      unsigned jobs = 0,
                      const std::optional<std::filesystem::path>& events_dir = std::nullopt,
                      const std::function<void(const RunResult&)>& progress = nullptr);

// Mean DTW distance over the batch for one estimate series label.
double mean_dtw(const BatchResult& batch, std::string_view estimate_label);

// Writes <out>/<scenario>/seed-<n>/<label>.csv for every series plus
// <out>/<scenario>/dtw_report.txt. Identical inputs overwrite byte-identically.
void write_batch_outputs(const BatchResult& batch, const std::filesystem::path& out_dir);

// Declared orderings over whatever known scenario families appear in
// `batches`: utilization (50 < 90 < 100), hop position (s3 <= s2) and window
// size (33-packet <= 17-packet). nullopt when no family is complete.
std::optional<analysis::TrendReport> evaluate_builtin_trends(
    const std::vector<BatchResult>& batches);

}  // namespace jittermon::scenario
