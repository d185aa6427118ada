#include "jittermon/ctrl_estimator.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "jittermon/errors.hpp"

namespace jittermon::ctrl {

void PollConfig::validate() const {
  if (interval <= SimTime{}) {
    throw config_error("poll config: interval must be > 0");
  }
  if (path_ports.empty()) {
    throw config_error("poll config: no path ports");
  }
  std::set<std::tuple<std::string, std::uint32_t, Direction>> seen;
  for (const auto& p : path_ports) {
    if (!seen.insert({p.switch_id, p.port, p.direction}).second) {
      throw config_error("poll config: duplicate path port " + p.switch_id + ":" +
                         std::to_string(p.port));
    }
  }
}

std::vector<PathPort> path_ports_for_flow(const Topology& topo, const FlowSpec& flow) {
  const auto path = shortest_path(topo, flow.src, flow.dst);
  std::vector<PathPort> ports;
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const Node& sw = topo.nodes[path[i]];
    if (sw.kind != NodeKind::switch_node) {
      continue;
    }
    std::uint32_t in_port = 0;
    std::uint32_t out_port = 0;
    const std::string& prev = topo.nodes[path[i - 1]].id;
    const std::string& next = topo.nodes[path[i + 1]].id;
    for (const auto& l : topo.links) {
      auto touches = [&](const std::string& x, const std::string& y) {
        return (l.a.node == x && l.b.node == y) || (l.a.node == y && l.b.node == x);
      };
      if (touches(sw.id, prev)) {
        in_port = l.a.node == sw.id ? l.a.port : l.b.port;
      }
      if (touches(sw.id, next)) {
        out_port = l.a.node == sw.id ? l.a.port : l.b.port;
      }
    }
    ports.push_back({sw.id, in_port, Direction::rx});
    ports.push_back({sw.id, out_port, Direction::tx});
  }
  return ports;
}

namespace {

void check_pairing(const PortCounterSample& prev, const PortCounterSample& curr) {
  if (prev.switch_id != curr.switch_id || prev.port != curr.port ||
      prev.direction != curr.direction) {
    throw std::invalid_argument("counter samples are from different ports");
  }
  if (curr.sampled_at <= prev.sampled_at) {
    throw std::invalid_argument("counter samples out of order");
  }
  if (curr.cumulative_packets < prev.cumulative_packets) {
    throw data_error("counter on " + curr.switch_id + ":" + std::to_string(curr.port) +
                     " decreased");
  }
}

}  // namespace

std::optional<double> per_packet_time(const PortCounterSample& prev,
                                      const PortCounterSample& curr) {
  check_pairing(prev, curr);
  const std::uint64_t delta = curr.cumulative_packets - prev.cumulative_packets;
  if (delta == 0) {
    return std::nullopt;
  }
  const double t = (curr.sampled_at - prev.sampled_at).seconds();
  return t / static_cast<double>(delta);
}

double rate(const PortCounterSample& prev, const PortCounterSample& curr) {
  check_pairing(prev, curr);
  const std::uint64_t delta = curr.cumulative_packets - prev.cumulative_packets;
  const double t = (curr.sampled_at - prev.sampled_at).seconds();
  return static_cast<double>(delta) / t;
}

RoundSum poll_round_sum(const std::vector<std::optional<double>>& per_port_time) {
  RoundSum out;
  for (const auto& t : per_port_time) {
    if (t) {
      out.sum += *t;
    } else {
      out.degraded = true;
    }
  }
  return out;
}

std::optional<double> jitter_estimate_step(std::optional<double> prev_sum,
                                           std::optional<double> curr_sum) {
  if (!prev_sum || !curr_sum) {
    return std::nullopt;
  }
  return std::abs(*curr_sum - *prev_sum);
}

ControllerEstimator::ControllerEstimator(PollConfig cfg, std::string series_label)
    : cfg_(std::move(cfg)), estimate_(std::move(series_label)) {
  cfg_.validate();
  // Baseline reading: every counter is zero before anything runs.
  for (const auto& p : cfg_.path_ports) {
    prev_samples_.push_back({p.switch_id, p.port, p.direction, 0, SimTime{}});
  }
}

void ControllerEstimator::observe(std::vector<PortCounterSample> samples, SimTime at) {
  if (samples.size() != cfg_.path_ports.size()) {
    throw std::invalid_argument("poll round has wrong number of samples");
  }
  PollRound round;
  round.round_index = rounds_.size();
  round.at = at;
  round.per_port_time.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    round.per_port_time.push_back(per_packet_time(prev_samples_[i], samples[i]));
  }
  const RoundSum rs = poll_round_sum(round.per_port_time);
  round.sum = rs.sum;
  round.degraded = rs.degraded;
  round.samples = samples;
  const std::optional<double> curr_sum = rs.degraded ? std::nullopt : std::optional(rs.sum);
  if (auto step = jitter_estimate_step(prev_sum_, curr_sum)) {
    estimate_.append(at, *step * 1e6);  // seconds -> microseconds
  }
  prev_sum_ = curr_sum;
  prev_samples_ = std::move(samples);
  rounds_.push_back(std::move(round));
}

void ControllerEstimator::poll(const sim::CounterView& counters, SimTime at) {
  std::vector<PortCounterSample> samples;
  samples.reserve(cfg_.path_ports.size());
  for (const auto& p : cfg_.path_ports) {
    const std::uint64_t count =
        cfg_.monitor_flow.empty()
            ? counters.packet_count(p.switch_id, p.port, p.direction)
            : counters.flow_packet_count(p.switch_id, p.port, p.direction, cfg_.monitor_flow);
    samples.push_back({p.switch_id, p.port, p.direction, count, at});
  }
  observe(std::move(samples), at);
}

}  // namespace jittermon::ctrl
