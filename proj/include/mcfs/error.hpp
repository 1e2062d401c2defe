#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcfs {

enum class ErrorCode {
  invalid_input,
  unsupported_feedback_sign,
  not_in_lambda,
  precondition_violation,
  missing_period,
  dependent_basis,
  numerical_failure,
  numerical_degeneracy,
  divergence,
  not_found,
  degenerate_orbit,
  not_connected,
  inconclusive,
  spectral_gap_below_tolerance,
  cone_consistency_violation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::unsupported_feedback_sign: return "unsupported-feedback-sign";
    case ErrorCode::not_in_lambda: return "not-in-Lambda";
    case ErrorCode::precondition_violation: return "precondition-violation";
    case ErrorCode::missing_period: return "missing-period";
    case ErrorCode::dependent_basis: return "dependent-basis";
    case ErrorCode::numerical_failure: return "numerical-failure";
    case ErrorCode::numerical_degeneracy: return "numerical-degeneracy";
    case ErrorCode::divergence: return "divergence";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::degenerate_orbit: return "degenerate-orbit";
    case ErrorCode::not_connected: return "not-connected";
    case ErrorCode::inconclusive: return "inconclusive";
    case ErrorCode::spectral_gap_below_tolerance: return "spectral-gap-below-tolerance";
    case ErrorCode::cone_consistency_violation: return "cone-consistency-violation";
  }
  return "unknown";
}

}  // namespace mcfs
