#pragma once

#include <stdexcept>
#include <string>

namespace jittermon {

// Bad scenario/topology/flow configuration, detected before anything runs.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Inconsistent measurement data, e.g. a cumulative counter going backwards.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace jittermon
