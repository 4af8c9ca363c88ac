#include "fracpq/error.hpp"

namespace fracpq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_extent: return "invalid-extent";
    case ErrorCode::too_few_cells: return "too-few-cells";
    case ErrorCode::parameter_out_of_range: return "parameter-out-of-range";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::missing_lambda: return "missing-lambda";
    case ErrorCode::zero_field: return "zero-field";
    case ErrorCode::regime_mismatch: return "regime-mismatch";
    case ErrorCode::not_above_cone: return "not-above-cone";
    case ErrorCode::infeasible_lambda: return "infeasible-lambda";
    case ErrorCode::asymmetric_grid: return "asymmetric-grid";
    case ErrorCode::insufficient_points: return "insufficient-points";
    case ErrorCode::malformed_config: return "malformed-config";
    case ErrorCode::io_failure: return "io-failure";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace fracpq
