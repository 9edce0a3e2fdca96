#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace scenewright {

struct SchemaIssue {
  std::string path;  // JSON pointer of the offending value ("" = root)
  std::string message;
};

/// Validates `instance` against a JSON-Schema document. Supports the subset
/// the engine's schemas use: type, enum, const, properties, required,
/// additionalProperties, items, min/maxItems, minimum/maximum,
/// exclusiveMinimum/Maximum, min/maxLength, anyOf, oneOf, allOf. Unknown
/// keywords are ignored. Returns the first issue found, depth-first.
std::optional<SchemaIssue> validate_schema(const nlohmann::json& schema, const nlohmann::json& instance);

/// Throws Error(SchemaViolation, "<path>: <message>") on the first issue.
void require_schema(const nlohmann::json& schema, const nlohmann::json& instance);

}  // namespace scenewright
