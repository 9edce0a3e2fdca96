#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace scenewright::llm {

struct ExtractedJson {
  nlohmann::json value;
  std::size_t begin = 0;  // offset of the opening bracket
  std::size_t end = 0;    // one past the closing bracket
};

/// First balanced top-level object or array in `text` that parses as JSON.
/// Surrounding prose and code fences are ignored.
std::optional<ExtractedJson> extract_json(std::string_view text);

/// Plain-text remainder: fences and structural brackets removed, whitespace
/// collapsed, trimmed. Ill-formed UTF-8 becomes U+FFFD.
std::string plain_text(std::string_view text);

}  // namespace scenewright::llm
