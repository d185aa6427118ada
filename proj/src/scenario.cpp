#include "jittermon/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "jittermon/csv.hpp"
#include "jittermon/ctrl_estimator.hpp"
#include "jittermon/errors.hpp"

namespace jittermon::scenario {

using nlohmann::json;

// --- config schema ----------------------------------------------------------

namespace {

int line_of(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos) {
    return -1;
  }
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + pos, '\n'));
}

[[noreturn]] void fail(const std::string& text, const std::string& key, const std::string& msg) {
  std::string out = "config: " + msg;
  const int line = line_of(text, key);
  if (line > 0) {
    out += " (line " + std::to_string(line) + ")";
  }
  throw config_error(out);
}

// Strict object access: every key must be known, requireds must be present.
class Obj {
 public:
  Obj(const json& j, std::string path, const std::string& text)
      : j_(j), path_(std::move(path)), text_(text) {
    if (!j_.is_object()) {
      fail(text_, leaf(), "'" + path_ + "' must be an object");
    }
  }

  ~Obj() noexcept(false) {
    if (std::uncaught_exceptions() > 0) {
      return;
    }
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) {
        fail(text_, key, "unknown key '" + key + "' in " + path_);
      }
    }
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    if (const json* v = get(key)) {
      return *v;
    }
    fail(text_, key, "missing key '" + key + "' in " + path_);
  }

  double number(const std::string& key) {
    const json& v = require(key);
    if (!v.is_number()) {
      fail(text_, key, "'" + path_ + "." + key + "' must be a number");
    }
    return v.get<double>();
  }

  double number_or(const std::string& key, double fallback) {
    const json* v = get(key);
    if (v == nullptr) {
      return fallback;
    }
    if (!v->is_number()) {
      fail(text_, key, "'" + path_ + "." + key + "' must be a number");
    }
    return v->get<double>();
  }

  std::uint64_t unsigned_int(const std::string& key) {
    const json& v = require(key);
    if (!v.is_number_unsigned()) {
      fail(text_, key, "'" + path_ + "." + key + "' must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) {
    const json& v = require(key);
    if (!v.is_string()) {
      fail(text_, key, "'" + path_ + "." + key + "' must be a string");
    }
    return v.get<std::string>();
  }

  std::string string_or(const std::string& key, const std::string& fallback) {
    return get(key) != nullptr ? string(key) : fallback;
  }

  const std::string& path() const { return path_; }
  const std::string& text() const { return text_; }

 private:
  std::string leaf() const {
    const auto pos = path_.rfind('.');
    return pos == std::string::npos ? path_ : path_.substr(pos + 1);
  }

  const json& j_;
  std::string path_;
  const std::string& text_;
  std::set<std::string> seen_;
};

SimTime seconds(double s) { return SimTime::from_ns(std::llround(s * 1e9)); }

analysis::TruthStatistic parse_statistic(const std::string& text, const std::string& v) {
  if (v == "mean_abs_consecutive") {
    return analysis::TruthStatistic::mean_abs_consecutive;
  }
  if (v == "std_dev") {
    return analysis::TruthStatistic::std_dev;
  }
  if (v == "sq_std_dev") {
    return analysis::TruthStatistic::sq_std_dev;
  }
  fail(text, v, "unknown truth statistic '" + v + "'");
}

FlowSpec parse_flow(const json& j, const std::string& path, const std::string& text,
                    SimTime duration) {
  Obj o(j, path, text);
  FlowSpec f;
  f.name = o.string("name");
  const std::string kind = o.string("kind");
  if (kind == "tagged_cbr") {
    f.kind = FlowKind::tagged_cbr;
  } else if (kind == "cross_onoff") {
    f.kind = FlowKind::cross_onoff;
  } else {
    fail(text, "kind", "flow '" + f.name + "': unknown kind '" + kind + "'");
  }
  f.src = o.string("src");
  f.dst = o.string("dst");
  f.packet_size_bytes = static_cast<std::uint32_t>(o.unsigned_int("packet_size_bytes"));
  f.start = seconds(o.number_or("start_s", 0.0));
  f.stop = seconds(o.number_or("stop_s", static_cast<double>(duration.ns()) / 1e9));
  if (f.kind == FlowKind::tagged_cbr) {
    f.rate_bps = o.unsigned_int("rate_bps");
    f.record_receiver_log = true;
  } else {
    const json& b = o.require("burst");
    Obj ob(b, path + ".burst", text);
    f.burst.rate_min_bps = ob.unsigned_int("rate_min_bps");
    f.burst.rate_max_bps = ob.unsigned_int("rate_max_bps");
    f.burst.on_min = seconds(ob.number("on_min_s"));
    f.burst.on_max = seconds(ob.number("on_max_s"));
    f.burst.off_min = seconds(ob.number("off_min_s"));
    f.burst.off_max = seconds(ob.number("off_max_s"));
    f.rate_bps = (f.burst.rate_min_bps + f.burst.rate_max_bps) / 2;  // nominal
    f.record_receiver_log = false;
  }
  return f;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + byte, '\n'));
    throw config_error("config: not valid JSON at line " + std::to_string(line) + ": " + e.what());
  }

  ScenarioConfig cfg;
  Obj o(root, "config", text);
  const auto version = o.unsigned_int("version");
  if (version != 1) {
    fail(text, "version", "unsupported config version " + std::to_string(version));
  }
  cfg.name = o.string_or("name", "custom");
  const double duration_s = o.number("duration_s");
  if (!(duration_s > 0.0)) {
    fail(text, "duration_s", "'duration_s' must be > 0");
  }
  cfg.duration = seconds(duration_s);

  if (const json* seeds = o.get("seeds")) {
    if (!seeds->is_array() || seeds->empty()) {
      fail(text, "seeds", "'seeds' must be a non-empty array");
    }
    cfg.seeds.clear();
    for (const auto& s : *seeds) {
      if (!s.is_number_unsigned()) {
        fail(text, "seeds", "'seeds' entries must be non-negative integers");
      }
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }

  {
    Obj t(o.require("topology"), "topology", text);
    const json& nodes = t.require("nodes");
    if (!nodes.is_array()) {
      fail(text, "nodes", "'topology.nodes' must be an array");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      Obj n(nodes[i], "topology.nodes[" + std::to_string(i) + "]", text);
      Node node;
      node.id = n.string("id");
      const std::string kind = n.string("kind");
      if (kind == "host") {
        node.kind = NodeKind::host;
      } else if (kind == "switch") {
        node.kind = NodeKind::switch_node;
      } else {
        fail(text, "kind", "node '" + node.id + "': unknown kind '" + kind + "'");
      }
      cfg.topology.nodes.push_back(std::move(node));
    }
    const json& links = t.require("links");
    if (!links.is_array()) {
      fail(text, "links", "'topology.links' must be an array");
    }
    for (std::size_t i = 0; i < links.size(); ++i) {
      Obj l(links[i], "topology.links[" + std::to_string(i) + "]", text);
      Link link;
      link.a = {l.string("a"), static_cast<std::uint32_t>(l.unsigned_int("a_port"))};
      link.b = {l.string("b"), static_cast<std::uint32_t>(l.unsigned_int("b_port"))};
      link.bandwidth_bps = l.unsigned_int("bandwidth_bps");
      link.propagation = SimTime::from_us(static_cast<std::int64_t>(l.unsigned_int("propagation_us")));
      link.queue_capacity = static_cast<std::uint32_t>(l.unsigned_int("queue_capacity_packets"));
      cfg.topology.links.push_back(std::move(link));
    }
  }

  {
    const json& flows = o.require("flows");
    if (!flows.is_array() || flows.empty()) {
      fail(text, "flows", "'flows' must be a non-empty array");
    }
    for (std::size_t i = 0; i < flows.size(); ++i) {
      cfg.flows.push_back(parse_flow(flows[i], "flows[" + std::to_string(i) + "]", text,
                                     cfg.duration));
    }
  }

  cfg.monitor_flow = o.string("monitor_flow");

  if (const json* c = o.get("controller")) {
    Obj oc(*c, "controller", text);
    ControllerConfig ctrl;
    ctrl.poll_interval = seconds(oc.number_or("poll_interval_s", 1.0));
    ctrl.truth_statistic = parse_statistic(text, oc.string_or("truth_statistic",
                                                              "mean_abs_consecutive"));
    cfg.controller = ctrl;
  }

  if (const json* d = o.get("data_plane")) {
    Obj od(*d, "data_plane", text);
    DataPlaneConfig dp;
    const json& switches = od.require("switches");
    if (!switches.is_array() || switches.empty()) {
      fail(text, "switches", "'data_plane.switches' must be a non-empty array");
    }
    for (const auto& s : switches) {
      dp.switches.push_back(s.get<std::string>());
    }
    const json& ms = od.require("window_m");
    if (!ms.is_array() || ms.empty()) {
      fail(text, "window_m", "'data_plane.window_m' must be a non-empty array");
    }
    for (const auto& m : ms) {
      if (!m.is_number_unsigned() || m.get<std::uint64_t>() < 1 || m.get<std::uint64_t>() > 16) {
        fail(text, "window_m", "'data_plane.window_m' entries must be integers in [1, 16]");
      }
      dp.window_m.push_back(static_cast<unsigned>(m.get<std::uint64_t>()));
    }
    const json& ests = od.require("estimators");
    if (!ests.is_array() || ests.empty()) {
      fail(text, "estimators", "'data_plane.estimators' must be a non-empty array");
    }
    for (const auto& e : ests) {
      const std::string v = e.get<std::string>();
      if (v == "euclid") {
        dp.euclid = true;
      } else if (v == "manhattan") {
        dp.manhattan = true;
      } else if (v == "ewma") {
        dp.ewma = true;
      } else {
        fail(text, "estimators", "unknown estimator '" + v + "'");
      }
    }
    const std::string w = od.string_or("ewma_weights", "7/8");
    if (w == "7/8") {
      dp.ewma_weights = dp::EwmaWeights::w7_8;
    } else if (w == "15/16") {
      dp.ewma_weights = dp::EwmaWeights::w15_16;
    } else {
      fail(text, "ewma_weights", "ewma_weights must be \"7/8\" or \"15/16\"");
    }
    cfg.data_plane = dp;
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw config_error("config: cannot read '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

void ScenarioConfig::validate() const {
  topology.validate();
  if (duration <= SimTime{}) {
    throw config_error("scenario '" + name + "': duration must be > 0");
  }
  if (seeds.empty()) {
    throw config_error("scenario '" + name + "': no seeds");
  }
  if (flows.empty()) {
    throw config_error("scenario '" + name + "': no flows");
  }
  std::set<std::string> names;
  for (const auto& f : flows) {
    f.validate();
    if (!names.insert(f.name).second) {
      throw config_error("scenario '" + name + "': duplicate flow name '" + f.name + "'");
    }
  }
  const auto monitored = std::find_if(flows.begin(), flows.end(),
                                      [&](const FlowSpec& f) { return f.name == monitor_flow; });
  if (monitored == flows.end()) {
    throw config_error("scenario '" + name + "': monitor_flow '" + monitor_flow +
                       "' is not a flow");
  }
  if (monitored->kind != FlowKind::tagged_cbr) {
    throw config_error("scenario '" + name + "': monitor_flow must be a tagged_cbr flow");
  }
  if (!controller && !data_plane) {
    throw config_error("scenario '" + name + "': no estimator configured");
  }
  if (controller && controller->poll_interval <= SimTime{}) {
    throw config_error("scenario '" + name + "': poll interval must be > 0");
  }
  if (data_plane) {
    if (!data_plane->euclid && !data_plane->manhattan && !data_plane->ewma) {
      throw config_error("scenario '" + name + "': data_plane enables no estimator");
    }
    for (const auto& sw : data_plane->switches) {
      const int n = topology.node_index(sw);
      if (n < 0 || topology.nodes[n].kind != NodeKind::switch_node) {
        throw config_error("scenario '" + name + "': data_plane switch '" + sw +
                           "' is not a switch");
      }
    }
    std::set<unsigned> ms(data_plane->window_m.begin(), data_plane->window_m.end());
    if (ms.size() != data_plane->window_m.size()) {
      throw config_error("scenario '" + name + "': duplicate window_m");
    }
  }
}

// --- builtin scenarios -------------------------------------------------------

Topology linear_topology() {
  Topology topo;
  topo.nodes = {{"h1", NodeKind::host},        {"s1", NodeKind::switch_node},
                {"s2", NodeKind::switch_node}, {"s3", NodeKind::switch_node},
                {"h3", NodeKind::host},        {"c1", NodeKind::host},
                {"c2", NodeKind::host},        {"c3", NodeKind::host},
                {"c4", NodeKind::host}};
  const SimTime prop = SimTime::from_us(50);
  const std::uint64_t host_bps = 1'000'000'000;
  const std::uint64_t trunk_bps = 100'000'000;
  topo.links = {
      {{"h1", 1}, {"s1", 1}, host_bps, prop, 100},
      {{"s1", 2}, {"s2", 2}, trunk_bps, prop, 100},
      {{"s2", 3}, {"s3", 3}, trunk_bps, prop, 100},
      {{"s3", 1}, {"h3", 1}, host_bps, prop, 100},
      {{"c1", 1}, {"s1", 10}, host_bps, prop, 100},
      {{"c2", 1}, {"s2", 10}, host_bps, prop, 100},
      {{"c3", 1}, {"s2", 11}, host_bps, prop, 100},
      {{"c4", 1}, {"s3", 10}, host_bps, prop, 100},
  };
  return topo;
}

std::vector<FlowSpec> default_cross_flows(SimTime stop, std::uint64_t rate_min_bps,
                                          std::uint64_t rate_max_bps) {
  // Distinct packet sizes keep the background service times off the
  // monitored flow's serialization grid, so saturation stays turbulent
  // instead of settling into lockstep.
  auto cross = [&](const std::string& name, const std::string& src, const std::string& dst,
                   std::uint32_t size_bytes) {
    FlowSpec f;
    f.name = name;
    f.src = src;
    f.dst = dst;
    f.kind = FlowKind::cross_onoff;
    f.packet_size_bytes = size_bytes;
    f.stop = stop;
    f.burst.rate_min_bps = rate_min_bps;
    f.burst.rate_max_bps = rate_max_bps;
    f.burst.on_min = SimTime::from_ms(500);
    f.burst.on_max = SimTime::from_ms(2000);
    f.burst.off_min = SimTime::from_ms(500);
    f.burst.off_max = SimTime::from_ms(2000);
    f.rate_bps = (f.burst.rate_min_bps + f.burst.rate_max_bps) / 2;
    f.record_receiver_log = false;
    return f;
  };
  return {cross("x12", "c1", "c2", 700), cross("x23", "c3", "c4", 1100)};
}

FlowSpec tagged_flow(std::uint64_t rate_bps, SimTime stop) {
  FlowSpec f;
  f.name = "tagged";
  f.src = "h1";
  f.dst = "h3";
  f.kind = FlowKind::tagged_cbr;
  f.rate_bps = rate_bps;
  f.packet_size_bytes = 1500;
  f.stop = stop;
  f.record_receiver_log = true;
  return f;
}

namespace {

ScenarioConfig single_flow(const std::string& name, std::uint64_t rate_bps, SimTime poll) {
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.duration = SimTime::from_s(200);
  cfg.topology = linear_topology();
  // Background load tracks the monitored rate: a busier network is a
  // noisier network.
  cfg.flows = default_cross_flows(cfg.duration, rate_bps * 2 / 25, rate_bps * 7 / 20);
  cfg.flows.insert(cfg.flows.begin(), tagged_flow(rate_bps, cfg.duration));
  cfg.monitor_flow = "tagged";
  cfg.controller = ControllerConfig{poll, analysis::TruthStatistic::mean_abs_consecutive};
  return cfg;
}

ScenarioConfig dp_scenario(const std::string& name, unsigned m, bool euclid) {
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.duration = SimTime::from_s(120);
  cfg.topology = linear_topology();
  cfg.flows = default_cross_flows(cfg.duration, 5'000'000, 30'000'000);
  // 12 Mbps of 1500 B frames = an even 1000 packets/s at the tagged source.
  cfg.flows.insert(cfg.flows.begin(), tagged_flow(12'000'000, cfg.duration));
  cfg.monitor_flow = "tagged";
  DataPlaneConfig dp;
  dp.switches = {"s2", "s3"};
  dp.window_m = {m};
  dp.euclid = euclid;
  dp.manhattan = !euclid;
  cfg.data_plane = dp;
  return cfg;
}

}  // namespace

ScenarioConfig builtin_scenario(std::string_view name) {
  if (name == "single-flow-50") {
    return single_flow("single-flow-50", 50'000'000, SimTime::from_s(1));
  }
  if (name == "single-flow-90") {
    return single_flow("single-flow-90", 90'000'000, SimTime::from_s(1));
  }
  if (name == "single-flow-100") {
    return single_flow("single-flow-100", 100'000'000, SimTime::from_s(1));
  }
  if (name == "poll-3s") {
    return single_flow("poll-3s", 90'000'000, SimTime::from_s(3));
  }
  if (name == "dp-euclid-17") {
    return dp_scenario("dp-euclid-17", 4, true);
  }
  if (name == "dp-euclid-33") {
    return dp_scenario("dp-euclid-33", 5, true);
  }
  if (name == "dp-manhattan-17") {
    return dp_scenario("dp-manhattan-17", 4, false);
  }
  if (name == "dp-manhattan-33") {
    return dp_scenario("dp-manhattan-33", 5, false);
  }
  throw config_error("unknown builtin scenario '" + std::string(name) + "'");
}

std::vector<std::string> builtin_names() {
  return {"single-flow-50", "single-flow-90",  "single-flow-100", "poll-3s",
          "dp-euclid-17",   "dp-euclid-33",    "dp-manhattan-17", "dp-manhattan-33"};
}

// --- running ------------------------------------------------------------------

RunResult run_one(const ScenarioConfig& cfg, std::uint64_t seed, const RunOptions& opt) {
  cfg.validate();
  const auto tagged = std::find_if(cfg.flows.begin(), cfg.flows.end(),
                                   [&](const FlowSpec& f) { return f.name == cfg.monitor_flow; });
  std::vector<FlowSpec> flows = cfg.flows;
  for (auto& f : flows) {
    if (f.name == cfg.monitor_flow) {
      f.record_receiver_log = true;  // ground truth needs the delivery log
    }
  }

  sim::Taps taps;
  std::optional<ctrl::ControllerEstimator> ctrl_est;
  if (cfg.controller) {
    ctrl::PollConfig pc;
    pc.interval = cfg.controller->poll_interval;
    pc.path_ports = ctrl::path_ports_for_flow(cfg.topology, *tagged);
    pc.monitor_flow = tagged->name;
    ctrl_est.emplace(pc, "ctrl_estimate");
    taps.timers.push_back(
        {pc.interval, [&](const sim::CounterView& cv, SimTime at) { ctrl_est->poll(cv, at); }});
  }

  struct WindowInstance {
    unsigned m = 0;
    std::uint32_t n = 0;
    dp::DelayWindow window;
    JitterSeries euclid;
    JitterSeries manhattan;
  };
  struct SwitchInstances {
    std::string sw;
    std::deque<WindowInstance> windows;
    std::optional<dp::EwmaEstimator> ewma;
    JitterSeries ewma_series;
  };
  std::deque<SwitchInstances> dp_state;
  if (cfg.data_plane) {
    const auto& d = *cfg.data_plane;
    for (const auto& sw : d.switches) {
      dp_state.push_back({sw, {}, std::nullopt, JitterSeries("ewma_" + sw)});
      SwitchInstances& inst = dp_state.back();
      for (const unsigned m : d.window_m) {
        const auto n = static_cast<std::uint32_t>((1u << m) + 1);
        const std::string suffix = sw + "_w" + std::to_string(n);
        inst.windows.push_back({m, n, dp::DelayWindow(m), JitterSeries("euclid_" + suffix),
                                JitterSeries("manhattan_" + suffix)});
      }
      if (d.ewma) {
        inst.ewma.emplace(d.ewma_weights);
      }
      taps.delay_taps.push_back(
          {sw, tagged->name, [&inst](std::uint64_t, FixedDelay delay, SimTime at) {
             for (auto& w : inst.windows) {
               if (const auto est = w.window.push(delay)) {
                 w.euclid.append(at, u128_to_double(est->euclid_sq));
                 w.manhattan.append(at, static_cast<double>(est->manhattan.value()));
               }
             }
             if (inst.ewma) {
               if (const auto v = inst.ewma->update(delay)) {
                 inst.ewma_series.append(at, *v);
               }
             }
           }});
    }
  }

  std::ofstream events_file;
  if (opt.events_path) {
    events_file.open(*opt.events_path, std::ios::binary | std::ios::trunc);
    if (!events_file) {
      throw config_error("cannot open events file '" + opt.events_path->string() + "'");
    }
    taps.event_sink = [&events_file](const sim::EventRecord& ev) {
      events_file << sim::to_line(ev) << '\n';
    };
  }

  const auto output = sim::run_scenario(cfg.topology, flows, seed, cfg.duration, taps);

  RunResult result;
  result.seed = seed;
  result.flow_stats = output.all_stats();
  const ReceiverLog& log = output.receiver_log(cfg.monitor_flow);

  auto add_series = [&](JitterSeries series, std::string unit) {
    result.series.push_back({std::move(series), std::move(unit)});
  };
  auto add_dtw = [&](const JitterSeries& est, const JitterSeries& truth) {
    if (!est.empty() && !truth.empty()) {
      result.dtw.push_back({est.label(), truth.label(), analysis::dtw_distance(est, truth)});
    }
  };

  if (cfg.controller) {
    const analysis::GroundTruthConfig gt{analysis::IntervalMode{cfg.controller->poll_interval},
                                         cfg.controller->truth_statistic};
    JitterSeries truth = analysis::ground_truth_series(log, gt, "truth");
    add_dtw(ctrl_est->estimate(), truth);
    add_series(truth, "us");
    add_series(ctrl_est->estimate(), "us");
  }

  if (cfg.data_plane) {
    // One truth series per window size, shared by the switches.
    std::map<std::uint32_t, JitterSeries> truth_var;
    std::map<std::uint32_t, JitterSeries> truth_std;
    for (const unsigned m : cfg.data_plane->window_m) {
      const auto n = static_cast<std::uint32_t>((1u << m) + 1);
      if (cfg.data_plane->euclid) {
        truth_var.emplace(
            n, analysis::ground_truth_series(
                   log, {analysis::WindowMode{n}, analysis::TruthStatistic::sq_std_dev},
                   "truth_w" + std::to_string(n) + "_var"));
      }
      if (cfg.data_plane->manhattan) {
        truth_std.emplace(
            n, analysis::ground_truth_series(
                   log, {analysis::WindowMode{n}, analysis::TruthStatistic::std_dev},
                   "truth_w" + std::to_string(n) + "_std"));
      }
    }
    for (auto& inst : dp_state) {
      for (auto& w : inst.windows) {
        if (cfg.data_plane->euclid) {
          add_dtw(w.euclid, truth_var.at(w.n));
          add_series(std::move(w.euclid), "us^2");
        }
        if (cfg.data_plane->manhattan) {
          add_dtw(w.manhattan, truth_std.at(w.n));
          add_series(std::move(w.manhattan), "us");
        }
      }
      if (inst.ewma) {
        add_series(std::move(inst.ewma_series), "us");
      }
    }
    for (auto& [n, s] : truth_var) {
      add_series(std::move(s), "us^2");
    }
    for (auto& [n, s] : truth_std) {
      add_series(std::move(s), "us");
    }
  }
  return result;
}

BatchResult run_batch(const ScenarioConfig& cfg, const std::vector<std::uint64_t>& seeds,
                      unsigned jobs, const std::optional<std::filesystem::path>& events_dir,
                      const std::function<void(const RunResult&)>& progress) {
  cfg.validate();
  if (seeds.empty()) {
    throw config_error("run_batch: no seeds");
  }
  BatchResult batch;
  batch.scenario = cfg.name;
  batch.runs.resize(seeds.size());
  if (jobs == 0) {
    jobs = std::max(1u, std::thread::hardware_concurrency());
  }
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(seeds.size()));

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < seeds.size();) {
      try {
        RunOptions opt;
        if (events_dir) {
          opt.events_path = *events_dir / ("events-seed-" + std::to_string(seeds[i]) + ".log");
        }
        RunResult r = run_one(cfg, seeds[i], opt);
        std::lock_guard lock(mu);
        if (progress) {
          progress(r);
        }
        batch.runs[i] = std::move(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) {
          first_error = std::current_exception();
        }
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < jobs; ++t) {
    pool.emplace_back(worker);
  }
  for (auto& t : pool) {
    t.join();
  }
  if (first_error) {
    std::rethrow_exception(first_error);
  }
  return batch;
}

double mean_dtw(const BatchResult& batch, std::string_view estimate_label) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& run : batch.runs) {
    for (const auto& row : run.dtw) {
      if (row.estimate_label == estimate_label) {
        sum += row.result.distance;
        ++count;
      }
    }
  }
  if (count == 0) {
    throw std::invalid_argument("no DTW rows for estimate '" + std::string(estimate_label) + "'");
  }
  return sum / static_cast<double>(count);
}

void write_batch_outputs(const BatchResult& batch, const std::filesystem::path& out_dir) {
  const auto scenario_dir = out_dir / batch.scenario;
  std::string report;
  for (const auto& run : batch.runs) {
    const auto seed_dir = scenario_dir / ("seed-" + std::to_string(run.seed));
    std::filesystem::create_directories(seed_dir);
    for (const auto& s : run.series) {
      csv::write_series(seed_dir / (s.series.label() + ".csv"), s.series, s.unit);
    }
    std::ofstream stats(seed_dir / "flow_stats.txt", std::ios::binary | std::ios::trunc);
    for (const auto& [flow, st] : run.flow_stats) {
      stats << flow << " sent " << st.sent << " received " << st.received << " dropped "
            << st.dropped << '\n';
    }
    for (const auto& row : run.dtw) {
      char line[256];
      std::snprintf(line, sizeof line, "seed %llu  %s vs %s  distance %.6f  per_point %.6f\n",
                    static_cast<unsigned long long>(run.seed), row.estimate_label.c_str(),
                    row.truth_label.c_str(), row.result.distance, row.result.per_point);
      report += line;
    }
  }
  if (!batch.runs.empty()) {
    std::set<std::string> labels;
    for (const auto& row : batch.runs.front().dtw) {
      labels.insert(row.estimate_label);
    }
    for (const auto& label : labels) {
      char line[256];
      std::snprintf(line, sizeof line, "mean  %s  distance %.6f\n", label.c_str(),
                    mean_dtw(batch, label));
      report += line;
    }
  }
  std::filesystem::create_directories(scenario_dir);
  std::ofstream f(scenario_dir / "dtw_report.txt", std::ios::binary | std::ios::trunc);
  f << report;
}

std::optional<analysis::TrendReport> evaluate_builtin_trends(
    const std::vector<BatchResult>& batches) {
  std::map<std::string, const BatchResult*> by_name;
  for (const auto& b : batches) {
    by_name[b.scenario] = &b;
  }
  std::vector<analysis::TrendEntry> entries;
  std::vector<analysis::TrendAssertion> assertions;
  auto entry_label = [](const std::string& scenario, const std::string& est) {
    return scenario + ":" + est;
  };
  for (const auto& b : batches) {
    if (b.runs.empty()) {
      continue;
    }
    std::set<std::string> labels;
    for (const auto& row : b.runs.front().dtw) {
      labels.insert(row.estimate_label);
    }
    for (const auto& label : labels) {
      entries.push_back({entry_label(b.scenario, label), mean_dtw(b, label)});
    }
  }
  auto have = [&](const std::string& scenario, const std::string& est) {
    const std::string want = entry_label(scenario, est);
    return std::any_of(entries.begin(), entries.end(),
                       [&](const analysis::TrendEntry& e) { return e.label == want; });
  };

  // Utilization: estimates track truth more closely as the link empties.
  if (have("single-flow-50", "ctrl_estimate") && have("single-flow-90", "ctrl_estimate") &&
      have("single-flow-100", "ctrl_estimate")) {
    assertions.push_back({{entry_label("single-flow-50", "ctrl_estimate"),
                           entry_label("single-flow-90", "ctrl_estimate"),
                           entry_label("single-flow-100", "ctrl_estimate")},
                          analysis::Order::strictly_less});
  }
  // Hop position: the switch nearer the receiver estimates at least as well.
  const struct {
    const char* scenario;
    const char* est;
    const char* n;
  } hop_cases[] = {{"dp-euclid-17", "euclid", "17"},
                   {"dp-euclid-33", "euclid", "33"},
                   {"dp-manhattan-17", "manhattan", "17"},
                   {"dp-manhattan-33", "manhattan", "33"}};
  for (const auto& c : hop_cases) {
    const std::string s2 = std::string(c.est) + "_s2_w" + c.n;
    const std::string s3 = std::string(c.est) + "_s3_w" + c.n;
    if (have(c.scenario, s2) && have(c.scenario, s3)) {
      assertions.push_back(
          {{entry_label(c.scenario, s3), entry_label(c.scenario, s2)}, analysis::Order::less_equal});
    }
  }
  // Window size: longer windows estimate at least as well (compared at s2).
  for (const char* est : {"euclid", "manhattan"}) {
    const std::string s17 = std::string("dp-") + est + "-17";
    const std::string s33 = std::string("dp-") + est + "-33";
    const std::string l17 = std::string(est) + "_s2_w17";
    const std::string l33 = std::string(est) + "_s2_w33";
    if (have(s17, l17) && have(s33, l33)) {
      assertions.push_back(
          {{entry_label(s33, l33), entry_label(s17, l17)}, analysis::Order::less_equal});
    }
  }
  if (entries.size() < 2) {
    return std::nullopt;
  }
  return analysis::trend_report(entries, assertions);
}

}  // namespace jittermon::scenario
