#include "ood/error.hpp"

namespace ood {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InsufficientSamples: return "insufficient-samples";
    case ErrorCode::NonFiniteInput: return "non-finite-input";
    case ErrorCode::NonDiscriminativeClass: return "non-discriminative-class";
    case ErrorCode::DimensionMismatch: return "dimension-mismatch";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::UncalibratedModel: return "uncalibrated-model";
    case ErrorCode::NonClassLabel: return "non-class-label";
    case ErrorCode::EmptyMisclassifiedSet: return "empty-misclassified-set";
    case ErrorCode::CoverageUnreachable: return "coverage-unreachable";
    case ErrorCode::EmptySplit: return "empty-split";
    case ErrorCode::IdMismatch: return "id-mismatch";
    case ErrorCode::InvalidSpec: return "invalid-spec";
    case ErrorCode::HeaderMismatch: return "header-mismatch";
    case ErrorCode::NonNumericValue: return "non-numeric-value";
    case ErrorCode::DuplicateId: return "duplicate-id";
    case ErrorCode::UnknownLabel: return "unknown-label";
    case ErrorCode::MalformedRow: return "malformed-row";
    case ErrorCode::VersionMismatch: return "version-mismatch";
    case ErrorCode::SchemaViolation: return "schema-violation";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace ood
