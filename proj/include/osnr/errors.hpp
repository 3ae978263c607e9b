#pragma once

#include <stdexcept>
#include <string>

namespace osnr {

/// Failure categories surfaced by the library. Each maps to one family of
/// contract violations so callers and tests can match on the kind instead of
/// parsing messages.
enum class ErrorKind {
  invalid_argument,        // bad sizes, ranges, enum values
  numerical_domain,        // non-finite input, indefinite matrix, overflow
  degenerate_constraints,  // rank-deficient constraint matrix, disconnected net
  precondition,            // infeasible anchor / start point
  parse,                   // malformed case-file text
  validation,              // parsed case violates a structural invariant
  unsupported_cost,        // gencost model outside the quadratic subset
  saturation,              // exp overflow guard tripped
  oracle_failure,          // round oracle did not converge
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Run-level failure: wraps the cause and pins the 1-based round index at
/// which an online loop aborted.
class RunError : public Error {
 public:
  RunError(int round, ErrorKind cause, const std::string& msg)
      : Error(cause, "round " + std::to_string(round) + ": " + msg),
        round_(round) {}

  int round() const noexcept { return round_; }

 private:
  int round_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace osnr
