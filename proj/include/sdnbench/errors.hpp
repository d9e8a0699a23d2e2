#pragma once

#include <stdexcept>

namespace sdnbench {

/// Invalid experiment setup, detected before any traffic runs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sdnbench
