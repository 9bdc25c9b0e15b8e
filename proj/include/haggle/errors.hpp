#pragma once

#include <stdexcept>
#include <string>

namespace haggle {

// Bad configuration: schema maps, sweep files, prompt templates.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unreadable or structurally broken input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace haggle
