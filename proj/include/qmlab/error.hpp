#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qmlab {

enum class ErrorCode {
  kInvalidArgument,
  kLengthMismatch,
  kDimensionMismatch,
  kInfiniteDivergence,
  kZeroProbabilityComponent,
  kZeroProbabilityBranch,
  kOutsideBlochBall,
  kNotTracePreserving,
  kNotHermitian,
  kNotUnitary,
  kNotNormalized,
  kBadDimension,
  kTargetOutOfRange,
  kNotAnEigenvector,
  kNoSolutions,
  kAllSolutions,
  kPostselectionImpossible,
  kSingularMatrix,
  kDuplicateSample,
  kZeroVector,
  kBadLength,
  kUnsupportedKind,
  kAliasedSpectrum,
  kUnsupportedGenerator,
  kIncompleteProjectors,
  kIntegratorDiverged,
  kSingularSystem,
  kSingularK1,
  kEmptyClass,
  kUnknownExperiment,
  kBadConfig,
  kIoFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace qmlab
