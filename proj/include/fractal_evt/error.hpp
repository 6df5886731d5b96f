#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fractal_evt {

enum class ErrorCode {
  kInvalidArgument,
  kMeasureMapMismatch,
  kWindowExhausted,
  kNotInGap,
  kDegenerateThreshold,
  kInsufficientGridCoverage,
  kInsufficientTailPoints,
  kInsufficientSpan,
  kFitDiverged,
  kTailNotConverged,
  kIo,
};

/// Stable machine-readable name, used in CLI error records.
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fractal_evt
