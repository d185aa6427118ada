#pragma once

#include <cstdint>
#include <string>

#include "jittermon/sim_time.hpp"

namespace jittermon {

enum class FlowKind {
  tagged_cbr,   // the monitored constant-bit-rate flow
  cross_onoff,  // background on/off bursts that induce queueing jitter
};

// Per-cycle burst parameters for cross traffic. Rate and both durations are
// drawn uniformly from these ranges at the start of every on/off cycle,
// from a generator seeded by (run seed, flow index).
struct CrossBurst {
  std::uint64_t rate_min_bps = 0;
  std::uint64_t rate_max_bps = 0;
  SimTime on_min;
  SimTime on_max;
  SimTime off_min;
  SimTime off_max;
};

struct FlowSpec {
  std::string name;
  std::string src;
  std::string dst;
  std::uint64_t rate_bps = 0;  // emission rate for tagged_cbr, nominal for cross
  std::uint32_t packet_size_bytes = 0;
  SimTime start;
  SimTime stop;
  FlowKind kind = FlowKind::tagged_cbr;
  CrossBurst burst;                 // cross_onoff only
  bool record_receiver_log = true;  // keep per-packet delivery entries

  void validate() const;  // throws config_error
};

}  // namespace jittermon
