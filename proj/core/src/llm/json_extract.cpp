#include "scenewright/llm/json_extract.hpp"

#include <cctype>
#include <vector>

namespace scenewright::llm {

namespace {

// End offset of the bracket group opening at `start`, or npos if the group
// is unbalanced or its brackets are mismatched.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '{': stack.push_back('}'); break;
      case '[': stack.push_back(']'); break;
      case '}':
      case ']':
        if (stack.empty() || stack.back() != c) return std::string_view::npos;
        stack.pop_back();
        if (stack.empty()) return i + 1;
        break;
      default: break;
    }
  }
  return std::string_view::npos;
}

// Length of the well-formed UTF-8 sequence starting at `i`, or 0.
std::size_t utf8_length(std::string_view text, std::size_t i) {
  const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  const unsigned char c = byte(i);
  if (c < 0x80) return 1;
  std::size_t n = 0;
  unsigned char lo = 0x80;
  unsigned char hi = 0xBF;
  if (c >= 0xC2 && c <= 0xDF) n = 2;
  else if (c >= 0xE0 && c <= 0xEF) {
    n = 3;
    if (c == 0xE0) lo = 0xA0;
    if (c == 0xED) hi = 0x9F;
  } else if (c >= 0xF0 && c <= 0xF4) {
    n = 4;
    if (c == 0xF0) lo = 0x90;
    if (c == 0xF4) hi = 0x8F;
  } else {
    return 0;
  }
  if (i + n > text.size()) return 0;
  if (byte(i + 1) < lo || byte(i + 1) > hi) return 0;
  for (std::size_t k = 2; k < n; ++k)
    if (byte(i + k) < 0x80 || byte(i + k) > 0xBF) return 0;
  return n;
}

}  // namespace

std::optional<ExtractedJson> extract_json(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    const std::size_t end = balanced_end(text, i);
    if (end == std::string_view::npos) continue;
    auto value = nlohmann::json::parse(text.substr(i, end - i), nullptr, false);
    if (value.is_discarded()) continue;
    return ExtractedJson{std::move(value), i, end};
  }
  return std::nullopt;
}

std::string plain_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text.substr(i, 3) == "```") {
      i += 3;
      while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
      --i;
      pending_space = true;
      continue;
    }
    const char c = text[i];
    if (c == '{' || c == '}' || c == '[' || c == ']') {
      pending_space = true;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    const std::size_t n = utf8_length(text, i);
    if (n == 0) {
      out += "\xEF\xBF\xBD";  // U+FFFD
      continue;
    }
    out.append(text.substr(i, n));
    i += n - 1;
  }
  return out;
}

}  // namespace scenewright::llm
