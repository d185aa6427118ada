#include "jittermon/simulation.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <optional>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

#include "jittermon/errors.hpp"
#include "jittermon/packet.hpp"

namespace jittermon::sim {

namespace {

constexpr std::uint32_t kNone = UINT32_MAX;

std::int64_t serialization_ns(std::uint32_t size_bytes, std::uint64_t bandwidth_bps) {
  const auto bits = static_cast<unsigned __int128>(size_bytes) * 8 * 1'000'000'000u;
  return static_cast<std::int64_t>(bits / bandwidth_bps);
}

// k-th emission offset of a CBR source: floor(k * bits * 1e9 / rate).
std::int64_t cbr_offset_ns(std::uint64_t k, std::uint32_t size_bytes, std::uint64_t rate_bps) {
  const auto num = static_cast<unsigned __int128>(k) * size_bytes * 8 * 1'000'000'000u;
  return static_cast<std::int64_t>(num / rate_bps);
}

std::uint64_t uniform_u64(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  // Modulo mapping: bias is irrelevant for traffic draws, determinism is not.
  return lo + (hi > lo ? rng() % (hi - lo + 1) : 0);
}

const char* kind_name(EventRecord::Kind k) {
  switch (k) {
    case EventRecord::Kind::emit: return "emit";
    case EventRecord::Kind::rx: return "rx";
    case EventRecord::Kind::tx: return "tx";
    case EventRecord::Kind::drop: return "drop";
    case EventRecord::Kind::deliver: return "deliver";
  }
  return "?";
}

}  // namespace

std::string to_line(const EventRecord& ev) {
  std::string out;
  out += std::to_string(ev.at.ns());
  out += ' ';
  out += kind_name(ev.kind);
  out += ' ';
  out += ev.node;
  out += ' ';
  out += std::to_string(ev.port);
  out += ' ';
  out += ev.flow;
  out += ' ';
  out += std::to_string(ev.seq);
  return out;
}

const ReceiverLog& SimulationOutput::receiver_log(std::string_view flow) const {
  auto it = receiver_logs_.find(std::string(flow));
  if (it == receiver_logs_.end()) {
    throw std::out_of_range("no receiver log for flow '" + std::string(flow) + "'");
  }
  return it->second;
}

FlowStats SimulationOutput::stats(std::string_view flow) const {
  auto it = stats_.find(std::string(flow));
  if (it == stats_.end()) {
    throw std::out_of_range("no such flow '" + std::string(flow) + "'");
  }
  return it->second;
}

const std::vector<DelayRecord>& SimulationOutput::switch_delay_stream(std::string_view switch_id,
                                                                      std::string_view flow) const {
  auto it = delay_streams_.find({std::string(switch_id), std::string(flow)});
  if (it == delay_streams_.end()) {
    throw std::out_of_range("no recorded delay stream at '" + std::string(switch_id) + "' for '" +
                            std::string(flow) + "'");
  }
  return it->second;
}

PortCounterSample SimulationOutput::sample_counters(std::string_view switch_id, std::uint32_t port,
                                                    Direction dir, SimTime at) const {
  auto it = counter_history_.find({std::string(switch_id), port, dir});
  if (it == counter_history_.end()) {
    throw std::out_of_range("no recorded counters for '" + std::string(switch_id) + "' port " +
                            std::to_string(port));
  }
  const auto& times = it->second;
  const auto count = std::upper_bound(times.begin(), times.end(), at) - times.begin();
  return {std::string(switch_id), port, dir, static_cast<std::uint64_t>(count), at};
}

std::uint64_t SimulationOutput::final_counter(std::string_view node, std::uint32_t port,
                                              Direction dir) const {
  auto it = final_counters_.find({std::string(node), port, dir});
  if (it == final_counters_.end()) {
    throw std::out_of_range("no such port " + std::to_string(port) + " on '" + std::string(node) +
                            "'");
  }
  return it->second;
}

std::string SimulationOutput::serialize() const {
  std::ostringstream os;
  for (const auto& [flow, st] : stats_) {
    os << "flow " << flow << " sent " << st.sent << " received " << st.received << " dropped "
       << st.dropped << '\n';
  }
  for (const auto& [flow, log] : receiver_logs_) {
    for (const auto& e : log.entries) {
      os << "log " << flow << ' ' << e.seq << ' ' << e.sent_at.ns() << ' ' << e.received_at.ns()
         << '\n';
    }
  }
  for (const auto& [key, count] : final_counters_) {
    os << "counter " << std::get<0>(key) << ' ' << std::get<1>(key) << ' '
       << to_string(std::get<2>(key)) << ' ' << count << '\n';
  }
  return os.str();
}

class Engine final : public CounterView {
  enum class EvKind : std::uint8_t { flow_emit, tx_done, arrival, timer };

  struct Ev {
    SimTime at;
    std::uint64_t order = 0;
    EvKind kind = EvKind::flow_emit;
    std::uint32_t a = 0;  // flow / port / tap index
    std::uint32_t b = 0;  // packet slot for arrival
  };

  struct EvLater {
    bool operator()(const Ev& x, const Ev& y) const {
      return x.at != y.at ? x.at > y.at : x.order > y.order;
    }
  };

 public:
  Engine(const Topology& topo, const std::vector<FlowSpec>& flows, std::uint64_t seed,
         SimTime duration, const Taps& taps)
      : topo_(topo), flows_(flows), duration_(duration), taps_(taps) {
    topo_.validate();
    build_network();
    build_flows(seed);
    wire_taps();
  }

  SimulationOutput run() {
    for (std::uint32_t f = 0; f < emitters_.size(); ++f) {
      if (auto t = first_emission(f)) {
        push(Ev{*t, next_order(), EvKind::flow_emit, f, 0});
      }
    }
    for (std::uint32_t i = 0; i < taps_.timers.size(); ++i) {
      const SimTime first = taps_.timers[i].period;
      if (first <= duration_) {
        push(Ev{first, next_order(), EvKind::timer, i, 0});
      }
    }
    while (!events_.empty()) {
      const Ev ev = events_.top();
      events_.pop();
      now_ = ev.at;
      switch (ev.kind) {
        case EvKind::flow_emit: on_emit(ev.a); break;
        case EvKind::tx_done: on_tx_done(ev.a); break;
        case EvKind::arrival: on_arrival(ev.a, ev.b); break;
        case EvKind::timer: on_timer(ev.a); break;
      }
    }
    return collect();
  }

  std::uint64_t packet_count(std::string_view switch_id, std::uint32_t port,
                             Direction dir) const override {
    const Port& p = ports_[lookup_port(switch_id, port)];
    return dir == Direction::rx ? p.rx_count : p.tx_count;
  }

  std::uint64_t flow_packet_count(std::string_view switch_id, std::uint32_t port, Direction dir,
                                  std::string_view flow) const override {
    const Port& p = ports_[lookup_port(switch_id, port)];
    for (std::uint32_t f = 0; f < flows_.size(); ++f) {
      if (flows_[f].name == flow) {
        return dir == Direction::rx ? p.flow_rx[f] : p.flow_tx[f];
      }
    }
    throw std::out_of_range("unknown flow '" + std::string(flow) + "'");
  }

 private:
  struct Port {
    std::uint32_t owner = 0;
    std::uint32_t number = 0;
    std::uint32_t peer = kNone;  // index into ports_
    std::uint64_t bandwidth_bps = 0;
    SimTime propagation;
    std::uint32_t capacity = 1;
    std::deque<std::uint32_t> queue;  // waiting packet slots
    std::optional<std::uint32_t> in_service;
    std::uint64_t rx_count = 0;
    std::uint64_t tx_count = 0;
    std::vector<std::uint64_t> flow_rx;  // per-flow slices of the counters
    std::vector<std::uint64_t> flow_tx;
    bool record_rx = false;
    bool record_tx = false;
    std::vector<SimTime> rx_history;
    std::vector<SimTime> tx_history;
  };

  struct Emitter {
    std::uint32_t flow = 0;
    std::uint64_t next_seq = 0;
    SimTime emit_end;
    // cross_onoff cycle state
    std::mt19937_64 rng;
    bool in_cycle = false;
    SimTime cycle_start;
    SimTime on_end;
    SimTime next_cycle;
    std::uint64_t burst_rate = 0;
    std::uint64_t k = 0;  // packet index within the current burst
  };

  struct DelayObserver {
    std::uint32_t flow = 0;
    const DelayTap* tap = nullptr;       // callback, may be null
    std::vector<DelayRecord>* record = nullptr;  // recorded stream, may be null
  };

  static std::uint64_t port_key(std::uint32_t node, std::uint32_t number) {
    return (static_cast<std::uint64_t>(node) << 32) | number;
  }

  std::uint32_t lookup_port(std::string_view node_id, std::uint32_t port) const {
    const int n = topo_.node_index(node_id);
    if (n < 0) {
      throw std::out_of_range("unknown node '" + std::string(node_id) + "'");
    }
    const auto it = port_index_.find(port_key(static_cast<std::uint32_t>(n), port));
    if (it == port_index_.end()) {
      throw std::out_of_range("unknown port " + std::to_string(port) + " on '" +
                              std::string(node_id) + "'");
    }
    return it->second;
  }

  void build_network() {
    for (const auto& l : topo_.links) {
      const auto ia = static_cast<std::uint32_t>(topo_.node_index(l.a.node));
      const auto ib = static_cast<std::uint32_t>(topo_.node_index(l.b.node));
      const auto pa = static_cast<std::uint32_t>(ports_.size());
      const auto pb = pa + 1;
      auto make_port = [&](std::uint32_t owner, std::uint32_t number, std::uint32_t peer) {
        Port p;
        p.owner = owner;
        p.number = number;
        p.peer = peer;
        p.bandwidth_bps = l.bandwidth_bps;
        p.propagation = l.propagation;
        p.capacity = l.queue_capacity;
        return p;
      };
      ports_.push_back(make_port(ia, l.a.port, pb));
      ports_.push_back(make_port(ib, l.b.port, pa));
      port_index_[port_key(ia, l.a.port)] = pa;
      port_index_[port_key(ib, l.b.port)] = pb;
    }
    node_ports_.resize(topo_.nodes.size());
    for (std::uint32_t p = 0; p < ports_.size(); ++p) {
      node_ports_[ports_[p].owner].push_back(p);
    }
  }

  void build_flows(std::uint64_t seed) {
    forward_.assign(flows_.size(), {});
    emitters_.resize(flows_.size());
    for (std::uint32_t f = 0; f < flows_.size(); ++f) {
      const FlowSpec& spec = flows_[f];
      spec.validate();
      for (const auto* endpoint : {&spec.src, &spec.dst}) {
        const int n = topo_.node_index(*endpoint);
        if (n < 0 || topo_.nodes[n].kind != NodeKind::host) {
          throw config_error("flow '" + spec.name + "': endpoint '" + *endpoint +
                             "' is not a host");
        }
      }
      const auto path = shortest_path(topo_, spec.src, spec.dst);
      auto& fwd = forward_[f];
      fwd.assign(topo_.nodes.size(), kNone);
      for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        fwd[path[i]] = out_port_toward(path[i], path[i + 1]);
      }
      Emitter& em = emitters_[f];
      em.flow = f;
      em.emit_end = std::min(spec.stop, duration_);
      std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                        f};
      em.rng.seed(seq);
      stats_[spec.name] = {};
      if (spec.record_receiver_log) {
        receiver_logs_[spec.name].flow = spec.name;
      }
    }
    for (auto& p : ports_) {
      p.flow_rx.assign(flows_.size(), 0);
      p.flow_tx.assign(flows_.size(), 0);
    }
  }

  std::uint32_t out_port_toward(std::uint32_t node, std::uint32_t next) const {
    for (auto p : node_ports_[node]) {
      if (ports_[ports_[p].peer].owner == next) {
        return p;
      }
    }
    throw config_error("no link from '" + topo_.nodes[node].id + "' to '" + topo_.nodes[next].id +
                       "'");
  }

  void wire_taps() {
    delay_observers_.resize(topo_.nodes.size());
    for (const auto& t : taps_.timers) {
      if (t.period <= SimTime{}) {
        throw config_error("timer tap period must be > 0");
      }
    }
    for (const auto& t : taps_.delay_taps) {
      auto [node, flow] = resolve_switch_flow(t.switch_id, t.flow);
      delay_observers_[node].push_back({flow, &t, nullptr});
    }
    recorded_streams_.reserve(taps_.record_delay_streams.size());
    for (const auto& [sw, fl] : taps_.record_delay_streams) {
      auto [node, flow] = resolve_switch_flow(sw, fl);
      recorded_streams_.push_back({});
      delay_observers_[node].push_back({flow, nullptr, &recorded_streams_.back()});
    }
    for (const auto& r : taps_.record_counters) {
      const int n = topo_.node_index(r.switch_id);
      if (n < 0 || topo_.nodes[n].kind != NodeKind::switch_node) {
        throw config_error("counter record: '" + r.switch_id + "' is not a switch");
      }
      auto it = port_index_.find(port_key(static_cast<std::uint32_t>(n), r.port));
      if (it == port_index_.end()) {
        throw config_error("counter record: no port " + std::to_string(r.port) + " on '" +
                           r.switch_id + "'");
      }
      (r.direction == Direction::rx ? ports_[it->second].record_rx
                                    : ports_[it->second].record_tx) = true;
    }
  }

  std::pair<std::uint32_t, std::uint32_t> resolve_switch_flow(const std::string& sw,
                                                              const std::string& fl) const {
    const int n = topo_.node_index(sw);
    if (n < 0 || topo_.nodes[n].kind != NodeKind::switch_node) {
      throw config_error("delay tap: '" + sw + "' is not a switch");
    }
    for (std::uint32_t f = 0; f < flows_.size(); ++f) {
      if (flows_[f].name == fl) {
        if (forward_[f][n] == kNone && flows_[f].dst != sw) {
          throw config_error("delay tap: flow '" + fl + "' does not traverse '" + sw + "'");
        }
        return {static_cast<std::uint32_t>(n), f};
      }
    }
    throw config_error("delay tap: unknown flow '" + fl + "'");
  }

  // --- event handlers -----------------------------------------------------

  void on_emit(std::uint32_t f) {
    const FlowSpec& spec = flows_[f];
    Emitter& em = emitters_[f];
    const std::uint32_t slot = alloc_packet();
    Packet& pkt = slots_[slot];
    pkt.flow = f;
    pkt.seq = em.next_seq++;
    pkt.size_bytes = spec.packet_size_bytes;
    pkt.sent_at = now_;
    stats_[spec.name].sent++;
    const std::uint32_t src = static_cast<std::uint32_t>(topo_.node_index(spec.src));
    const std::uint32_t out = forward_[f][src];
    sink({now_, EventRecord::Kind::emit, topo_.nodes[src].id, ports_[out].number, spec.name,
          pkt.seq});
    enqueue(out, slot);
    if (auto t = next_emission(f)) {
      push(Ev{*t, next_order(), EvKind::flow_emit, f, 0});
    }
  }

  void on_tx_done(std::uint32_t p) {
    Port& port = ports_[p];
    assert(port.in_service);
    const std::uint32_t slot = *port.in_service;
    const Packet& pkt = slots_[slot];
    port.tx_count++;
    port.flow_tx[pkt.flow]++;
    if (port.record_tx) {
      port.tx_history.push_back(now_);
    }
    sink({now_, EventRecord::Kind::tx, topo_.nodes[port.owner].id, port.number,
          flows_[pkt.flow].name, pkt.seq});
    push(Ev{now_ + port.propagation, next_order(), EvKind::arrival, port.peer, slot});
    if (!port.queue.empty()) {
      const std::uint32_t next = port.queue.front();
      port.queue.pop_front();
      start_tx(p, next);
    } else {
      port.in_service.reset();
    }
  }

  void on_arrival(std::uint32_t p, std::uint32_t slot) {
    Port& port = ports_[p];
    const std::uint32_t node = port.owner;
    Packet& pkt = slots_[slot];
    const FlowSpec& spec = flows_[pkt.flow];
    port.rx_count++;
    port.flow_rx[pkt.flow]++;
    if (port.record_rx) {
      port.rx_history.push_back(now_);
    }
    sink({now_, EventRecord::Kind::rx, topo_.nodes[node].id, port.number, spec.name, pkt.seq});
    assert(now_ >= pkt.sent_at);
    assert(pkt.hop_rx.empty() || pkt.hop_rx.back().at <= now_);
    pkt.hop_rx.push_back({node, now_});
    if (topo_.nodes[node].kind == NodeKind::host) {
      assert(topo_.nodes[node].id == spec.dst);
      stats_[spec.name].received++;
      sink({now_, EventRecord::Kind::deliver, topo_.nodes[node].id, port.number, spec.name,
            pkt.seq});
      if (spec.record_receiver_log) {
        receiver_logs_[spec.name].entries.push_back({pkt.seq, pkt.sent_at, now_});
      }
      free_packet(slot);
      return;
    }
    for (const auto& obs : delay_observers_[node]) {
      if (obs.flow != pkt.flow) {
        continue;
      }
      const FixedDelay d{static_cast<std::uint64_t>((now_ - pkt.sent_at).us_floor())};
      if (obs.tap != nullptr) {
        obs.tap->fn(pkt.seq, d, now_);
      }
      if (obs.record != nullptr) {
        obs.record->push_back({pkt.seq, d, now_});
      }
    }
    const std::uint32_t out = forward_[pkt.flow][node];
    assert(out != kNone);
    enqueue(out, slot);
  }

  void on_timer(std::uint32_t i) {
    taps_.timers[i].fn(*this, now_);
    const SimTime next = now_ + taps_.timers[i].period;
    if (next <= duration_) {
      push(Ev{next, next_order(), EvKind::timer, i, 0});
    }
  }

  // --- queueing -----------------------------------------------------------

  void enqueue(std::uint32_t p, std::uint32_t slot) {
    Port& port = ports_[p];
    if (!port.in_service) {
      start_tx(p, slot);
      return;
    }
    if (port.queue.size() >= port.capacity) {
      const Packet& pkt = slots_[slot];
      stats_[flows_[pkt.flow].name].dropped++;
      sink({now_, EventRecord::Kind::drop, topo_.nodes[port.owner].id, port.number,
            flows_[pkt.flow].name, pkt.seq});
      free_packet(slot);
      return;
    }
    port.queue.push_back(slot);
  }

  void start_tx(std::uint32_t p, std::uint32_t slot) {
    Port& port = ports_[p];
    port.in_service = slot;
    const auto ser = serialization_ns(slots_[slot].size_bytes, port.bandwidth_bps);
    push(Ev{now_ + SimTime::from_ns(ser), next_order(), EvKind::tx_done, p, 0});
  }

  // --- emission schedules ---------------------------------------------------

  std::optional<SimTime> first_emission(std::uint32_t f) {
    const FlowSpec& spec = flows_[f];
    Emitter& em = emitters_[f];
    if (spec.start >= em.emit_end) {
      return std::nullopt;
    }
    if (spec.kind == FlowKind::tagged_cbr) {
      return spec.start;
    }
    em.in_cycle = false;
    em.cycle_start = spec.start;
    return next_cross_emission(em);
  }

  std::optional<SimTime> next_emission(std::uint32_t f) {
    const FlowSpec& spec = flows_[f];
    Emitter& em = emitters_[f];
    if (spec.kind == FlowKind::tagged_cbr) {
      em.k++;
      const SimTime t = spec.start + SimTime::from_ns(cbr_offset_ns(
                                         em.k, spec.packet_size_bytes, spec.rate_bps));
      return t < em.emit_end ? std::optional(t) : std::nullopt;
    }
    em.k++;
    return next_cross_emission(em);
  }

  std::optional<SimTime> next_cross_emission(Emitter& em) {
    const FlowSpec& spec = flows_[em.flow];
    for (;;) {
      if (em.cycle_start >= em.emit_end) {
        return std::nullopt;
      }
      if (!em.in_cycle) {
        em.burst_rate = uniform_u64(em.rng, spec.burst.rate_min_bps, spec.burst.rate_max_bps);
        const auto on = uniform_u64(em.rng, static_cast<std::uint64_t>(spec.burst.on_min.ns()),
                                    static_cast<std::uint64_t>(spec.burst.on_max.ns()));
        const auto off = uniform_u64(em.rng, static_cast<std::uint64_t>(spec.burst.off_min.ns()),
                                     static_cast<std::uint64_t>(spec.burst.off_max.ns()));
        em.on_end = em.cycle_start + SimTime::from_ns(static_cast<std::int64_t>(on));
        em.next_cycle = em.on_end + SimTime::from_ns(static_cast<std::int64_t>(off));
        em.k = 0;
        em.in_cycle = true;
      }
      const SimTime t = em.cycle_start + SimTime::from_ns(cbr_offset_ns(
                                             em.k, spec.packet_size_bytes, em.burst_rate));
      if (t < em.on_end && t < em.emit_end) {
        return t;
      }
      em.in_cycle = false;
      em.cycle_start = em.next_cycle;
    }
  }

  // --- plumbing -------------------------------------------------------------

  std::uint32_t alloc_packet() {
    if (!free_slots_.empty()) {
      const std::uint32_t s = free_slots_.back();
      free_slots_.pop_back();
      slots_[s].hop_rx.clear();
      return s;
    }
    slots_.emplace_back();
    return static_cast<std::uint32_t>(slots_.size() - 1);
  }

  void free_packet(std::uint32_t slot) { free_slots_.push_back(slot); }

  void sink(const EventRecord& ev) {
    if (taps_.event_sink) {
      taps_.event_sink(ev);
    }
  }

  void push(Ev ev) { events_.push(ev); }
  std::uint64_t next_order() { return order_++; }

  SimulationOutput collect() {
    SimulationOutput out;
    out.stats_ = std::move(stats_);
    out.receiver_logs_ = std::move(receiver_logs_);
    for (std::size_t i = 0; i < taps_.record_delay_streams.size(); ++i) {
      out.delay_streams_[taps_.record_delay_streams[i]] = std::move(recorded_streams_[i]);
    }
    for (Port& p : ports_) {
      const std::string& owner = topo_.nodes[p.owner].id;
      out.final_counters_[{owner, p.number, Direction::rx}] = p.rx_count;
      out.final_counters_[{owner, p.number, Direction::tx}] = p.tx_count;
      if (p.record_rx) {
        out.counter_history_[{owner, p.number, Direction::rx}] = std::move(p.rx_history);
      }
      if (p.record_tx) {
        out.counter_history_[{owner, p.number, Direction::tx}] = std::move(p.tx_history);
      }
    }
    return out;
  }

  Topology topo_;
  std::vector<FlowSpec> flows_;
  SimTime duration_;
  const Taps& taps_;

  std::vector<Port> ports_;
  std::unordered_map<std::uint64_t, std::uint32_t> port_index_;
  std::vector<std::vector<std::uint32_t>> node_ports_;
  std::vector<std::vector<std::uint32_t>> forward_;  // [flow][node] -> out port
  std::vector<Emitter> emitters_;
  std::vector<std::vector<DelayObserver>> delay_observers_;
  std::vector<std::vector<DelayRecord>> recorded_streams_;

  std::vector<Packet> slots_;
  std::vector<std::uint32_t> free_slots_;

  std::priority_queue<Ev, std::vector<Ev>, EvLater> events_;
  std::uint64_t order_ = 0;
  SimTime now_;

  std::map<std::string, FlowStats> stats_;
  std::map<std::string, ReceiverLog> receiver_logs_;
};

SimulationOutput run_scenario(const Topology& topology, const std::vector<FlowSpec>& flows,
                              std::uint64_t seed, SimTime duration, const Taps& taps) {
  Engine engine(topology, flows, seed, duration, taps);
  return engine.run();
}

}  // namespace jittermon::sim
