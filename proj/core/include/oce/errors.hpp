#pragma once

#include <stdexcept>
#include <string>

namespace oce {

/// Invalid configuration or inconsistent inputs (CLI exit code 3).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File format / filesystem failures (CLI exit code 4).
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite values or failed numerical preconditions (CLI exit code 5).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace oce
