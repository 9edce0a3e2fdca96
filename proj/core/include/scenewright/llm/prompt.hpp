#pragma once

#include "scenewright/command.hpp"
#include "scenewright/context_library.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scenewright::llm {

enum class PromptStage { Initial, Refined };
std::string_view to_string(PromptStage stage) noexcept;

/// Template text shipped with the library, by file stem
/// ("initial_system", "guidance_create", ...). Throws NotFound.
std::string_view prompt_asset(std::string_view name);

std::string sha256_hex(std::string_view data);

struct PromptEnvelope {
  PromptStage stage = PromptStage::Initial;
  std::optional<TaskType> task_type;  // refined only
  std::string system_text;            // rendered, schema included
  std::string user_text;              // the request (or subtask) verbatim
  std::string user_message;           // rendered message sent to the model
  nlohmann::json schema;
  std::optional<ContextPayload> context;
  std::vector<std::string> history;

  [[nodiscard]] nlohmann::json to_json() const;
  /// SHA-256 of the canonical JSON form.
  [[nodiscard]] std::string digest() const;
};

struct Subtask {
  TaskType task_type = TaskType::Converse;
  std::string request;
  std::vector<ContextCategory> categories;
};

struct TaskDecomposition {
  std::vector<Subtask> subtasks;
};

const nlohmann::json& decomposition_schema();

PromptEnvelope build_initial_prompt(const std::string& text, const std::vector<std::string>& history);
/// Throws NoJSONFound, SchemaViolation, UnknownCategory or UnknownProperty,
/// each with the path of the offending field.
TaskDecomposition parse_initial_response(std::string_view text);

/// Throws CategoryMismatch unless `payload` holds exactly the subtask's
/// categories.
PromptEnvelope build_refined_prompt(const Subtask& subtask, const ContextPayload& payload);
/// Throws NoJSONFound (except for converse) and SchemaViolation.
CommandEnvelope parse_refined_response(std::string_view text, TaskType task_type);

}  // namespace scenewright::llm
