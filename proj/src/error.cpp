#include "dsakit/error.hpp"

namespace dsakit {

std::string_view error_tag(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoMissing: return "E_IO_MISSING";
    case ErrorCode::kIo: return "E_IO";
    case ErrorCode::kBadMagic: return "E_BAD_MAGIC";
    case ErrorCode::kUnsupportedVersion: return "E_UNSUPPORTED_VERSION";
    case ErrorCode::kTruncated: return "E_TRUNCATED";
    case ErrorCode::kParse: return "E_PARSE";
    case ErrorCode::kDimensionMismatch: return "E_DIMENSION_MISMATCH";
    case ErrorCode::kNonFiniteValue: return "E_NON_FINITE";
    case ErrorCode::kCountMismatch: return "E_COUNT_MISMATCH";
    case ErrorCode::kLabelOutOfRange: return "E_LABEL_OUT_OF_RANGE";
    case ErrorCode::kInvalidArgument: return "E_INVALID_ARGUMENT";
    case ErrorCode::kUnknownTap: return "E_UNKNOWN_TAP";
    case ErrorCode::kEmptyInput: return "E_EMPTY_INPUT";
    case ErrorCode::kEmptyClass: return "E_EMPTY_CLASS";
    case ErrorCode::kEmptyComplement: return "E_EMPTY_COMPLEMENT";
    case ErrorCode::kEmptyNeighborhood: return "E_EMPTY_NEIGHBORHOOD";
    case ErrorCode::kZeroDenominator: return "E_ZERO_DENOMINATOR";
    case ErrorCode::kNoCornerCases: return "E_NO_CORNER_CASES";
    case ErrorCode::kDegenerateLabels: return "E_NO_CORNER_CASES";
    case ErrorCode::kDivergence: return "E_DIVERGENCE";
    case ErrorCode::kOracleUnavailable: return "E_ORACLE_UNAVAILABLE";
  }
  return "E_UNKNOWN";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoMissing:
    case ErrorCode::kIo:
    case ErrorCode::kBadMagic:
    case ErrorCode::kUnsupportedVersion:
    case ErrorCode::kTruncated:
    case ErrorCode::kParse:
      return 2;
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNonFiniteValue:
    case ErrorCode::kCountMismatch:
    case ErrorCode::kLabelOutOfRange:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownTap:
    case ErrorCode::kOracleUnavailable:
      return 3;
    case ErrorCode::kEmptyInput:
    case ErrorCode::kEmptyClass:
    case ErrorCode::kEmptyComplement:
    case ErrorCode::kEmptyNeighborhood:
    case ErrorCode::kZeroDenominator:
    case ErrorCode::kNoCornerCases:
    case ErrorCode::kDegenerateLabels:
    case ErrorCode::kDivergence:
      return 4;
  }
  return 1;
}

}  // namespace dsakit
