#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "jittermon/sim_time.hpp"

namespace jittermon {

enum class NodeKind { host, switch_node };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::host;
};

struct LinkEnd {
  std::string node;
  std::uint32_t port = 0;
};

// Full-duplex link. Each direction has its own output queue of
// `queue_capacity` waiting packets (plus one in transmission) at the
// sending end; arrivals to a full queue are tail-dropped.
struct Link {
  LinkEnd a;
  LinkEnd b;
  std::uint64_t bandwidth_bps = 0;
  SimTime propagation;
  std::uint32_t queue_capacity = 1;
};

struct Topology {
  std::vector<Node> nodes;
  std::vector<Link> links;

  // Throws config_error on duplicate ids, dangling endpoints, reused
  // (node, port) pairs, or non-positive bandwidth/capacity.
  void validate() const;

  // Index into nodes, or -1 when the id is unknown.
  int node_index(std::string_view id) const;
};

// Unique shortest path between two nodes as a node-index sequence,
// src first. Throws config_error when src/dst are unknown or disconnected.
std::vector<std::uint32_t> shortest_path(const Topology& topo, std::string_view src,
                                         std::string_view dst);

}  // namespace jittermon
