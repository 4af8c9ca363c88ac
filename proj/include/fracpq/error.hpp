#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracpq {

enum class ErrorCode {
  invalid_extent,
  too_few_cells,
  parameter_out_of_range,
  dimension_mismatch,
  missing_lambda,
  zero_field,
  regime_mismatch,
  not_above_cone,
  infeasible_lambda,
  asymmetric_grid,
  insufficient_points,
  malformed_config,
  io_failure,
};

std::string_view to_string(ErrorCode code);

/// Raised for precondition violations and unrecoverable solver outcomes.
/// Non-convergence is not an error: solvers return their best iterate
/// with `converged == false` instead.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fracpq
