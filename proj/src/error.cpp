#include "fractal_evt/error.hpp"

namespace fractal_evt {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kMeasureMapMismatch: return "measure_map_mismatch";
    case ErrorCode::kWindowExhausted: return "window_exhausted";
    case ErrorCode::kNotInGap: return "not_in_gap";
    case ErrorCode::kDegenerateThreshold: return "degenerate_threshold";
    case ErrorCode::kInsufficientGridCoverage: return "insufficient_grid_coverage";
    case ErrorCode::kInsufficientTailPoints: return "insufficient_tail_points";
    case ErrorCode::kInsufficientSpan: return "insufficient_span";
    case ErrorCode::kFitDiverged: return "fit_diverged";
    case ErrorCode::kTailNotConverged: return "tail_not_converged";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

}  // namespace fractal_evt
