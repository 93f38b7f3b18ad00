#pragma once

#include <stdexcept>
#include <string>

namespace psguard {

/// Broad failure category; the CLI maps these onto process exit codes.
enum class ErrorKind {
  Usage,      // bad arguments or configuration (exit 1)
  Data,       // malformed input or failed validation (exit 2)
  Internal,   // broken invariant (exit 3)
};

/// Exception carrying the module that raised it, so orchestration code can
/// report "<module>: <message>" without string parsing.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return 1;
    case ErrorKind::Data: return 2;
    case ErrorKind::Internal: return 3;
  }
  return 3;
}

}  // namespace psguard
