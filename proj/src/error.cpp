#include "sollab/error.hpp"

namespace sollab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::no_bracket_found: return "no-bracket-found";
    case ErrorCode::tolerance_not_reached: return "tolerance-not-reached";
    case ErrorCode::tail_window_too_short: return "tail-window-too-short";
    case ErrorCode::unsupported_order: return "unsupported-order";
    case ErrorCode::quadrature_tolerance_not_met: return "quadrature-tolerance-not-met";
    case ErrorCode::branch_undecidable: return "branch-undecidable";
    case ErrorCode::limit_not_resolved: return "limit-not-resolved";
    case ErrorCode::step_size_underflow: return "step-size-underflow";
    case ErrorCode::parabolic_seed_unavailable: return "parabolic-seed-unavailable";
    case ErrorCode::singular_system: return "singular-system";
    case ErrorCode::box_too_small: return "box-too-small";
    case ErrorCode::nan_detected: return "nan-detected";
    case ErrorCode::config_invalid: return "config-invalid";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

QuadratureError::QuadratureError(double est, double bound, const std::string& what)
    : Error(ErrorCode::quadrature_tolerance_not_met, what), estimate(est), error_bound(bound) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sollab
