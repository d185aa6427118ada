#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jittermon/sim_time.hpp"

namespace jittermon {

struct ReceiverEntry {
  std::uint64_t seq = 0;
  SimTime sent_at;
  SimTime received_at;
};

// What the destination host recorded for one flow, ordered by arrival.
// One-way delays (received_at - sent_at) are the ground-truth inputs.
struct ReceiverLog {
  std::string flow;
  std::vector<ReceiverEntry> entries;
};

}  // namespace jittermon
