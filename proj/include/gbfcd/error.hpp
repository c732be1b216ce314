#pragma once

#include <stdexcept>
#include <string>

namespace gbfcd {

/// Error categories; the numeric values double as CLI exit codes.
enum class ErrorKind : int {
  config = 2,
  io = 3,
  numerical = 4,
};

/// Exception carrying the failing module name and an error category.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), kind_(kind), module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline Error config_error(std::string module, const std::string& message) {
  return {ErrorKind::config, std::move(module), message};
}
inline Error io_error(std::string module, const std::string& message) {
  return {ErrorKind::io, std::move(module), message};
}
inline Error numerical_error(std::string module, const std::string& message) {
  return {ErrorKind::numerical, std::move(module), message};
}

}  // namespace gbfcd
