#include "zsx/error.hpp"

namespace zsx {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kDimensionMismatch: return "dimension-mismatch";
    case ErrorCode::kDuplicate: return "duplicate";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kEmptyInput: return "empty-input";
    case ErrorCode::kEmptyRepresentation: return "empty-representation";
    case ErrorCode::kDegenerateVector: return "degenerate-vector";
    case ErrorCode::kUnknownMode: return "unknown-mode";
    case ErrorCode::kDanglingReference: return "dangling-reference";
    case ErrorCode::kEmptyCatalog: return "empty-catalog";
    case ErrorCode::kEmptyIntersection: return "empty-intersection";
    case ErrorCode::kSingularSystem: return "singular-system";
    case ErrorCode::kMissingScore: return "missing-score";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kProviderUnavailable: return "provider-unavailable";
    case ErrorCode::kProviderProtocol: return "provider-protocol";
    case ErrorCode::kEmptyRanking: return "empty-ranking";
    case ErrorCode::kTreeMismatch: return "tree-mismatch";
    case ErrorCode::kSingleClass: return "single-class";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kUnknownLabel: return "unknown-label";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace zsx
