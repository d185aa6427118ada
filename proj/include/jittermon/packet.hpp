#pragma once

#include <cstdint>
#include <vector>

#include "jittermon/sim_time.hpp"

namespace jittermon {

struct HopStamp {
  std::uint32_t node = 0;  // dense node index assigned by the engine
  SimTime at;
};

// A simulated packet. The origin timestamp travels with the packet, standing
// in for an in-band timestamp header; every node stamps its ingress time on
// full arrival.
struct Packet {
  std::uint32_t flow = 0;  // dense flow index
  std::uint64_t seq = 0;
  std::uint32_t size_bytes = 0;
  SimTime sent_at;
  std::vector<HopStamp> hop_rx;
};

}  // namespace jittermon
