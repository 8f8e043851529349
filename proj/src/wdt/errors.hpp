#pragma once

#include <stdexcept>
#include <string>

namespace wdt {

// Error categories; values double as CLI exit codes.
enum class errc : int {
  ok = 0,
  other = 1,
  config = 2,
  numeric = 3,
  threshold = 4,
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(errc::config, what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error(errc::numeric, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(errc::io, what) {}
};

struct ThresholdError : Error {
  explicit ThresholdError(const std::string& what) : Error(errc::threshold, what) {}
};

}  // namespace wdt
