#pragma once

#include <stdexcept>
#include <string>

namespace mobsynth {

// Numeric values double as CLI exit codes and C API status codes.
enum class ErrorKind : int {
  input = 1,
  infeasible = 2,
  internal = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed or out-of-contract input (bad arguments, schema violations).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// Well-formed input that cannot be processed: empty hour slices, zero
/// normalizers, infeasible worlds.
class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::infeasible, what) {}
};

/// A broken internal invariant. Always a bug.
class InvariantError : public Error {
 public:
  explicit InvariantError(const std::string& what)
      : Error(ErrorKind::internal, what) {}
};

// Same error kind with `context` prepended to the message.
inline Error with_context(const Error& e, const std::string& context) {
  return Error(e.kind(), context + ": " + e.what());
}

}  // namespace mobsynth
