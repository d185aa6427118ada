#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "jittermon/counters.hpp"
#include "jittermon/fixed_delay.hpp"
#include "jittermon/flow.hpp"
#include "jittermon/receiver_log.hpp"
#include "jittermon/sim_time.hpp"
#include "jittermon/topology.hpp"

namespace jittermon::sim {

// Line-oriented debug record, rendered as
// "<time_ns> <event_kind> <node> <port> <flow> <seq>".
struct EventRecord {
  enum class Kind { emit, rx, tx, drop, deliver };
  SimTime at;
  Kind kind = Kind::emit;
  std::string_view node;
  std::uint32_t port = 0;
  std::string_view flow;
  std::uint64_t seq = 0;
};

std::string to_line(const EventRecord& ev);

struct FlowStats {
  std::uint64_t sent = 0;
  std::uint64_t received = 0;
  std::uint64_t dropped = 0;
};

// One-way delay of a packet measured at a switch ingress, truncated to
// whole microseconds.
struct DelayRecord {
  std::uint64_t seq = 0;
  FixedDelay delay;
  SimTime at;
};

// Read-only view of the live cumulative counters, handed to timer taps.
// Ports count every packet; the flow-filtered variant models per-flow port
// statistics as flow tables expose them.
class CounterView {
 public:
  virtual ~CounterView() = default;
  virtual std::uint64_t packet_count(std::string_view switch_id, std::uint32_t port,
                                     Direction dir) const = 0;
  virtual std::uint64_t flow_packet_count(std::string_view switch_id, std::uint32_t port,
                                          Direction dir, std::string_view flow) const = 0;
};

// Observer registrations. All callbacks run synchronously inside the
// single-threaded event loop.
struct TimerTap {
  SimTime period;
  std::function<void(const CounterView&, SimTime at)> fn;
};

struct DelayTap {
  std::string switch_id;
  std::string flow;
  std::function<void(std::uint64_t seq, FixedDelay delay, SimTime at)> fn;
};

struct CounterRecordRequest {
  std::string switch_id;
  std::uint32_t port = 0;
  Direction direction = Direction::rx;
};

struct Taps {
  std::vector<TimerTap> timers;
  std::vector<DelayTap> delay_taps;
  // Retain the full (seq, delay) stream at these (switch, flow) pairs.
  std::vector<std::pair<std::string, std::string>> record_delay_streams;
  // Retain per-event timestamps so counters can be sampled at any instant
  // after the run.
  std::vector<CounterRecordRequest> record_counters;
  std::function<void(const EventRecord&)> event_sink;
};

class SimulationOutput {
 public:
  const ReceiverLog& receiver_log(std::string_view flow) const;
  FlowStats stats(std::string_view flow) const;
  const std::map<std::string, FlowStats>& all_stats() const { return stats_; }

  // Recorded stream for a (switch, flow) named in Taps::record_delay_streams.
  const std::vector<DelayRecord>& switch_delay_stream(std::string_view switch_id,
                                                      std::string_view flow) const;

  // Counter value at an arbitrary instant; requires the port to have been
  // named in Taps::record_counters. Unknown port -> std::out_of_range.
  PortCounterSample sample_counters(std::string_view switch_id, std::uint32_t port, Direction dir,
                                    SimTime at) const;

  // Cumulative count after the run drained. Valid for every port.
  std::uint64_t final_counter(std::string_view node, std::uint32_t port, Direction dir) const;

  // Deterministic text dump of stats, logs and final counters; two runs
  // with identical inputs produce identical bytes.
  std::string serialize() const;

 private:
  friend class Engine;
  std::map<std::string, ReceiverLog> receiver_logs_;
  std::map<std::string, FlowStats> stats_;
  std::map<std::pair<std::string, std::string>, std::vector<DelayRecord>> delay_streams_;
  std::map<std::tuple<std::string, std::uint32_t, Direction>, std::vector<SimTime>> counter_history_;
  std::map<std::tuple<std::string, std::uint32_t, Direction>, std::uint64_t> final_counters_;
};

// Runs the scenario to completion: packet sources stop at min(flow stop,
// duration), timer taps stop at duration, and the event loop then drains all
// queued and in-flight packets. Deterministic for fixed inputs and seed.
SimulationOutput run_scenario(const Topology& topology, const std::vector<FlowSpec>& flows,
                              std::uint64_t seed, SimTime duration, const Taps& taps = {});

}  // namespace jittermon::sim
