#include "scenewright/error.hpp"

namespace scenewright {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::AmbiguousName: return "AmbiguousName";
    case ErrorCode::InvalidTransform: return "InvalidTransform";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::UnknownProperty: return "UnknownProperty";
    case ErrorCode::MissingSource: return "MissingSource";
    case ErrorCode::UnknownPrefab: return "UnknownPrefab";
    case ErrorCode::UnknownUnit: return "UnknownUnit";
    case ErrorCode::MissingTarget: return "MissingTarget";
    case ErrorCode::DuplicateActiveId: return "DuplicateActiveId";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::StaleTimestamp: return "StaleTimestamp";
    case ErrorCode::UnknownBlock: return "UnknownBlock";
    case ErrorCode::NoJSONFound: return "NoJSONFound";
    case ErrorCode::CategoryMismatch: return "CategoryMismatch";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::TranscriptMiss: return "TranscriptMiss";
    case ErrorCode::FrameTooLarge: return "FrameTooLarge";
    case ErrorCode::TruncatedFrame: return "TruncatedFrame";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::BindFailure: return "BindFailure";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::FixtureMissing: return "FixtureMissing";
    case ErrorCode::GoldenMismatch: return "GoldenMismatch";
  }
  return "Unknown";
}

}  // namespace scenewright
