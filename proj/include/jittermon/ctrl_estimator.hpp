#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jittermon/counters.hpp"
#include "jittermon/flow.hpp"
#include "jittermon/jitter_series.hpp"
#include "jittermon/simulation.hpp"
#include "jittermon/topology.hpp"

namespace jittermon::ctrl {

struct PathPort {
  std::string switch_id;
  std::uint32_t port = 0;
  Direction direction = Direction::rx;
};

struct PollConfig {
  SimTime interval = SimTime::from_s(1);
  std::vector<PathPort> path_ports;
  // When set, polls the per-flow slice of each port counter (flow-table
  // statistics); empty polls the whole-port counters. With a single flow
  // on the path the two readings coincide.
  std::string monitor_flow;

  void validate() const;  // throws config_error
};

// The ingress ("load") and egress ("offload") port of every switch the flow
// traverses, in path order.
std::vector<PathPort> path_ports_for_flow(const Topology& topo, const FlowSpec& flow);

// Average per-packet time t/(b-a) seen by one port between two counter
// readings; nullopt when no packet passed. Throws data_error if the counter
// decreased, std::invalid_argument on mismatched ports or non-increasing
// sample times.
std::optional<double> per_packet_time(const PortCounterSample& prev, const PortCounterSample& curr);

// Packets per second (b-a)/t over the same reading pair; 0 when idle.
double rate(const PortCounterSample& prev, const PortCounterSample& curr);

struct PollRound {
  std::uint64_t round_index = 0;
  SimTime at;
  std::vector<PortCounterSample> samples;
  std::vector<std::optional<double>> per_port_time;  // seconds, nullopt = no traffic
  double sum = 0.0;                                  // idle ports contribute 0
  bool degraded = false;                             // some port saw no traffic
};

struct RoundSum {
  double sum = 0.0;
  bool degraded = false;
};

RoundSum poll_round_sum(const std::vector<std::optional<double>>& per_port_time);

// |curr - prev| when both rounds were clean, otherwise no point (a gap in
// the estimate series).
std::optional<double> jitter_estimate_step(std::optional<double> prev_sum,
                                           std::optional<double> curr_sum);

// Consumes one set of path-port counter readings per poll instant and keeps
// an estimate series of successive poll-sum differences, in microseconds.
class ControllerEstimator {
 public:
  ControllerEstimator(PollConfig cfg, std::string series_label);

  // `samples` must match cfg.path_ports element-for-element.
  void observe(std::vector<PortCounterSample> samples, SimTime at);

  // Samples the live counters and calls observe(); bind to a sim::TimerTap.
  void poll(const sim::CounterView& counters, SimTime at);

  const JitterSeries& estimate() const { return estimate_; }
  const std::vector<PollRound>& rounds() const { return rounds_; }
  const PollConfig& config() const { return cfg_; }

 private:
  PollConfig cfg_;
  std::vector<PortCounterSample> prev_samples_;
  std::optional<double> prev_sum_;
  std::vector<PollRound> rounds_;
  JitterSeries estimate_;
};

}  // namespace jittermon::ctrl
