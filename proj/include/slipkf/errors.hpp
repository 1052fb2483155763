#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slipkf {

enum class ErrorKind {
  kInvalidConfig,
  kInvalidState,
  kFilterDivergence,
  kInvalidInput,
  kFormat,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig: return "invalid config";
    case ErrorKind::kInvalidState: return "invalid state";
    case ErrorKind::kFilterDivergence: return "filter divergence";
    case ErrorKind::kInvalidInput: return "invalid input";
    case ErrorKind::kFormat: return "format error";
  }
  return "error";
}

// All library failures are reported through this one exception type; callers
// branch on kind() rather than on a class hierarchy.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same kind, message prefixed with context (e.g. a sample index).
  Error annotated(const std::string& context) const { return Error(kind_, context + ": " + detail_); }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace slipkf
