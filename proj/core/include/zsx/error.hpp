#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zsx {

// Failure categories raised by the engine. The CLI maps kConfig to exit code 2
// and every other category to exit code 3.
enum class ErrorCode {
  kConfig,
  kIo,
  kParse,
  kDimensionMismatch,
  kDuplicate,
  kNonFinite,
  kEmptyInput,
  kEmptyRepresentation,
  kDegenerateVector,
  kUnknownMode,
  kDanglingReference,
  kEmptyCatalog,
  kEmptyIntersection,
  kSingularSystem,
  kMissingScore,
  kOutOfRange,
  kProviderUnavailable,
  kProviderProtocol,
  kEmptyRanking,
  kTreeMismatch,
  kSingleClass,
  kLengthMismatch,
  kUnknownLabel,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Non-fatal diagnostics (dropped labels, skipped spans, fallback trees).
// Functions accepting a `Warnings*` append to it when non-null.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace zsx
