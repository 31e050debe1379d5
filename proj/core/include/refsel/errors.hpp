#pragma once

#include <stdexcept>
#include <string>

namespace refsel {

// Error taxonomy mirrors the CLI exit codes: config/usage (1),
// validation (2), numerical (3).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

// Malformed input file; carries a 1-based line number when known.
struct ParseError : Error {
  explicit ParseError(const std::string& msg, long line = -1)
      : Error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_number(line) {}
  long line_number;
};

struct ValidationError : Error {
  using Error::Error;
};

struct NumericalError : Error {
  using Error::Error;
};

}  // namespace refsel
