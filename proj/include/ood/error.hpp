#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ood {

enum class ErrorCode {
  InsufficientSamples,
  NonFiniteInput,
  NonDiscriminativeClass,
  DimensionMismatch,
  InvalidArgument,
  UncalibratedModel,
  NonClassLabel,
  EmptyMisclassifiedSet,
  CoverageUnreachable,
  EmptySplit,
  IdMismatch,
  InvalidSpec,
  HeaderMismatch,
  NonNumericValue,
  DuplicateId,
  UnknownLabel,
  MalformedRow,
  VersionMismatch,
  SchemaViolation,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Domain error raised by every module. `code()` identifies the failure kind;
/// `what()` carries a human-readable diagnostic including location when known.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// No grid value reached the requested coverage; carries the best achieved.
class CoverageError : public Error {
 public:
  CoverageError(const std::string& message, double best_coverage, double best_threshold)
      : Error(ErrorCode::CoverageUnreachable, message),
        best_coverage_(best_coverage),
        best_threshold_(best_threshold) {}

  double best_coverage() const noexcept { return best_coverage_; }
  double best_threshold() const noexcept { return best_threshold_; }

 private:
  double best_coverage_;
  double best_threshold_;
};

}  // namespace ood
