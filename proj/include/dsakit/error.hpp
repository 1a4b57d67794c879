#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dsakit {

enum class ErrorCode {
  kIoMissing,
  kIo,
  kBadMagic,
  kUnsupportedVersion,
  kTruncated,
  kParse,
  kDimensionMismatch,
  kNonFiniteValue,
  kCountMismatch,
  kLabelOutOfRange,
  kInvalidArgument,
  kUnknownTap,
  kEmptyInput,
  kEmptyClass,
  kEmptyComplement,
  kEmptyNeighborhood,
  kZeroDenominator,
  kNoCornerCases,
  kDegenerateLabels,
  kDivergence,
  kOracleUnavailable,
};

// Stable machine-readable tag, e.g. "E_IO_MISSING".
std::string_view error_tag(ErrorCode code);

// Process exit code family: 2 I/O, 3 validation, 4 degenerate data.
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dsakit
