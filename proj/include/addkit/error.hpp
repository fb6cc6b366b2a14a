#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace addkit {

enum class ErrorCode {
  domain,                  // argument outside an operation's domain
  missing_derivative,      // q(t, xi) requested but the profile has no h'
  reversed_time,           // s > t
  reference_not_positive,  // reference exponent vanishes away from the origin
  degenerate_family,       // base exponent has a nontrivial zero set
  evaluation,              // non-finite function value
  weight_sum,              // weights of a constrained form do not sum to zero
  insufficient_decay,      // e^{-Q} does not decay inside the frequency window
  step_underflow,          // sigma too small for a logarithmic derivative
  grid_mismatch,
  unbounded_ball,
  zero_volume,
  non_normalized_table,
  assumption_violation,
  config,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace addkit
