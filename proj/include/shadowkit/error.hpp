#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shadowkit {

enum class ErrorCode {
  malformed_point,
  invalid_system,
  not_hyperbolic,
  unsupported_system,
  calibration_violated,
  internal_invariant,
  budget_exceeded,
  horizon_exceeded,
  not_transitive,
  no_witness,
  not_related,
  precision,
  empty_input,
  precondition,
  syntax,
  unknown_key,
  schema_mismatch,
  io,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_point: return "malformed-point";
    case ErrorCode::invalid_system: return "invalid-system";
    case ErrorCode::not_hyperbolic: return "not-hyperbolic";
    case ErrorCode::unsupported_system: return "unsupported-system";
    case ErrorCode::calibration_violated: return "calibration-violated";
    case ErrorCode::internal_invariant: return "internal-invariant";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::horizon_exceeded: return "horizon-exceeded";
    case ErrorCode::not_transitive: return "not-transitive";
    case ErrorCode::no_witness: return "no-witness";
    case ErrorCode::not_related: return "not-related";
    case ErrorCode::precision: return "precision";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::syntax: return "syntax";
    case ErrorCode::unknown_key: return "unknown-key";
    case ErrorCode::schema_mismatch: return "schema-mismatch";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace shadowkit
