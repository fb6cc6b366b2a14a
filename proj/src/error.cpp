#include "addkit/error.hpp"

namespace addkit {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::domain: return "domain";
    case ErrorCode::missing_derivative: return "missing_derivative";
    case ErrorCode::reversed_time: return "reversed_time";
    case ErrorCode::reference_not_positive: return "reference_not_positive";
    case ErrorCode::degenerate_family: return "degenerate_family";
    case ErrorCode::evaluation: return "evaluation";
    case ErrorCode::weight_sum: return "weight_sum";
    case ErrorCode::insufficient_decay: return "insufficient_decay";
    case ErrorCode::step_underflow: return "step_underflow";
    case ErrorCode::grid_mismatch: return "grid_mismatch";
    case ErrorCode::unbounded_ball: return "unbounded_ball";
    case ErrorCode::zero_volume: return "zero_volume";
    case ErrorCode::non_normalized_table: return "non_normalized_table";
    case ErrorCode::assumption_violation: return "assumption_violation";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace addkit
