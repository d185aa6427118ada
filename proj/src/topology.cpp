#include "jittermon/topology.hpp"

#include <deque>
#include <set>
#include <unordered_map>

#include "jittermon/errors.hpp"
#include "jittermon/flow.hpp"

namespace jittermon {

void Topology::validate() const {
  std::set<std::string> ids;
  for (const auto& n : nodes) {
    if (n.id.empty()) {
      throw config_error("topology: empty node id");
    }
    if (!ids.insert(n.id).second) {
      throw config_error("topology: duplicate node id '" + n.id + "'");
    }
  }
  std::set<std::pair<std::string, std::uint32_t>> ports;
  for (const auto& l : links) {
    for (const auto* end : {&l.a, &l.b}) {
      if (!ids.contains(end->node)) {
        throw config_error("topology: link endpoint '" + end->node + "' is not a node");
      }
      if (!ports.insert({end->node, end->port}).second) {
        throw config_error("topology: port " + std::to_string(end->port) + " of '" + end->node +
                           "' appears in more than one link");
      }
    }
    if (l.bandwidth_bps == 0) {
      throw config_error("topology: link " + l.a.node + "-" + l.b.node + " has zero bandwidth");
    }
    if (l.queue_capacity < 1) {
      throw config_error("topology: link " + l.a.node + "-" + l.b.node + " queue_capacity < 1");
    }
    if (l.propagation < SimTime{}) {
      throw config_error("topology: link " + l.a.node + "-" + l.b.node + " negative propagation");
    }
  }
}

int Topology::node_index(std::string_view id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].id == id) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

std::vector<std::uint32_t> shortest_path(const Topology& topo, std::string_view src,
                                         std::string_view dst) {
  const int s = topo.node_index(src);
  const int d = topo.node_index(dst);
  if (s < 0 || d < 0) {
    throw config_error("path: unknown node '" + std::string(s < 0 ? src : dst) + "'");
  }
  std::vector<std::vector<std::uint32_t>> adj(topo.nodes.size());
  for (const auto& l : topo.links) {
    const auto ia = static_cast<std::uint32_t>(topo.node_index(l.a.node));
    const auto ib = static_cast<std::uint32_t>(topo.node_index(l.b.node));
    adj[ia].push_back(ib);
    adj[ib].push_back(ia);
  }
  std::vector<int> parent(topo.nodes.size(), -1);
  std::deque<std::uint32_t> frontier{static_cast<std::uint32_t>(s)};
  parent[s] = s;
  while (!frontier.empty()) {
    const auto u = frontier.front();
    frontier.pop_front();
    if (static_cast<int>(u) == d) {
      break;
    }
    for (auto v : adj[u]) {
      if (parent[v] < 0) {
        parent[v] = static_cast<int>(u);
        frontier.push_back(v);
      }
    }
  }
  if (parent[d] < 0) {
    throw config_error("path: no route from '" + std::string(src) + "' to '" + std::string(dst) +
                       "'");
  }
  std::vector<std::uint32_t> path;
  for (std::uint32_t v = static_cast<std::uint32_t>(d);; v = static_cast<std::uint32_t>(parent[v])) {
    path.push_back(v);
    if (static_cast<int>(v) == s) {
      break;
    }
  }
  return {path.rbegin(), path.rend()};
}

void FlowSpec::validate() const {
  if (name.empty()) {
    throw config_error("flow: empty name");
  }
  if (rate_bps == 0) {
    throw config_error("flow '" + name + "': rate must be > 0");
  }
  if (packet_size_bytes < 64 || packet_size_bytes > 1500) {
    throw config_error("flow '" + name + "': packet_size must be in [64, 1500] bytes");
  }
  if (stop < start || start < SimTime{}) {
    throw config_error("flow '" + name + "': bad start/stop window");
  }
  if (kind == FlowKind::cross_onoff) {
    if (burst.rate_min_bps == 0 || burst.rate_max_bps < burst.rate_min_bps) {
      throw config_error("flow '" + name + "': bad burst rate range");
    }
    if (burst.on_min <= SimTime{} || burst.on_max < burst.on_min) {
      throw config_error("flow '" + name + "': bad burst on-duration range");
    }
    if (burst.off_min <= SimTime{} || burst.off_max < burst.off_min) {
      throw config_error("flow '" + name + "': bad burst off-duration range");
    }
  }
}

}  // namespace jittermon
