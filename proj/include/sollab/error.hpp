#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sollab {

enum class ErrorCode {
  invalid_argument,
  no_bracket_found,
  tolerance_not_reached,
  tail_window_too_short,
  unsupported_order,
  quadrature_tolerance_not_met,
  branch_undecidable,
  limit_not_resolved,
  step_size_underflow,
  parabolic_seed_unavailable,
  singular_system,
  box_too_small,
  nan_detected,
  config_invalid,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Carries the best estimate when an adaptive rule ran out of budget.
class QuadratureError : public Error {
 public:
  QuadratureError(double estimate, double error_bound, const std::string& what);
  double estimate;
  double error_bound;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace sollab
