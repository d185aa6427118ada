#pragma once

#include <filesystem>
#include <string>

#include "jittermon/jitter_series.hpp"

namespace jittermon::csv {

// Stable plot-ready encoding: header "time_ns,value,unit,label", decimal
// values rendered locale-independently (shortest round-trip form).
std::string series_to_csv(const JitterSeries& series, const std::string& unit);

// Writes (overwrites) the file; identical series produce identical bytes.
void write_series(const std::filesystem::path& path, const JitterSeries& series,
                  const std::string& unit);

}  // namespace jittermon::csv
