#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace scenewright {

enum class ErrorCode {
  // scene-core
  DuplicateName,
  UnknownParent,
  UnknownObject,
  CycleDetected,
  NotFound,
  AmbiguousName,
  InvalidTransform,
  // context-library
  UnknownCategory,
  UnknownProperty,
  // object-creator
  MissingSource,
  UnknownPrefab,
  // animation-library
  UnknownUnit,
  MissingTarget,
  DuplicateActiveId,
  // reality-fusion
  SchemaViolation,
  StaleTimestamp,
  UnknownBlock,
  // llm-wrapper
  NoJSONFound,
  CategoryMismatch,
  ProviderUnavailable,
  TranscriptMiss,
  // gateway
  FrameTooLarge,
  TruncatedFrame,
  MalformedFrame,
  BindFailure,
  ConfigInvalid,
  FixtureMissing,
  GoldenMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library is reported as an Error carrying
/// a stable code; `what()` holds the human-readable detail (for schema
/// failures, prefixed by the JSON pointer of the offending field).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace scenewright
