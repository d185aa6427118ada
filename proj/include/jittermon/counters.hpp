#pragma once

#include <cstdint>
#include <string>

#include "jittermon/sim_time.hpp"

namespace jittermon {

enum class Direction { rx, tx };

inline const char* to_string(Direction d) {
  return d == Direction::rx ? "rx" : "tx";
}

// One reading of a cumulative per-port packet counter: how many packets had
// fully arrived at (rx) or fully serialized out of (tx) the port at or
// before `sampled_at`.
struct PortCounterSample {
  std::string switch_id;
  std::uint32_t port = 0;
  Direction direction = Direction::rx;
  std::uint64_t cumulative_packets = 0;
  SimTime sampled_at;
};

}  // namespace jittermon
