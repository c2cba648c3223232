#pragma once

#include <stdexcept>
#include <string>

namespace lta {

// Invalid user-supplied configuration: bad spec fields, unknown identifiers,
// impossible ratios. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Data that does not satisfy an operation's contract (missing feedback,
// dimension mismatch, malformed files).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during optimization (non-finite loss or gradients).
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace lta
