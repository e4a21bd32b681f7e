#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hct {

enum class ErrorKind {
  shape,
  config,
  format,
  contract,
  validation,
  range,
  oracle,
  task_mismatch,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::shape: return "shape";
    case ErrorKind::config: return "config";
    case ErrorKind::format: return "format";
    case ErrorKind::contract: return "contract";
    case ErrorKind::validation: return "validation";
    case ErrorKind::range: return "range";
    case ErrorKind::oracle: return "oracle";
    case ErrorKind::task_mismatch: return "task-mismatch";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries a category so the CLI can map
/// it onto a one-line machine-parsable message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace hct
