#pragma once

#include <stdexcept>
#include <string>

namespace forestcl {

// Exit code 2: bad configuration (windows mismatch, invalid parameters, schema violations).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exit code 3: bad input data (duplicate ids, points outside window, malformed files).
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exit code 4: numerical failure (overflow, rank deficiency, non-convergence).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace forestcl
