#include "jittermon/csv.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace jittermon::csv {

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string series_to_csv(const JitterSeries& series, const std::string& unit) {
  std::string out = "time_ns,value,unit,label\n";
  for (const auto& p : series.points()) {
    out += std::to_string(p.at.ns());
    out += ',';
    out += format_double(p.value);
    out += ',';
    out += unit;
    out += ',';
    out += series.label();
    out += '\n';
  }
  return out;
}

void write_series(const std::filesystem::path& path, const JitterSeries& series,
                  const std::string& unit) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  f << series_to_csv(series, unit);
}

}  // namespace jittermon::csv
