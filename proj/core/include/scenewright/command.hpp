#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace scenewright {

enum class TaskType { Create, Animate, Fuse, Converse };

std::string_view to_string(TaskType type) noexcept;
std::optional<TaskType> task_type_from_string(std::string_view name) noexcept;

/// A validated structured command plus any conversational text that came
/// with it. `payload` is empty for speech-only replies.
struct CommandEnvelope {
  TaskType task_type = TaskType::Converse;
  nlohmann::json payload = nlohmann::json::object();
  std::string speech_text;

  [[nodiscard]] nlohmann::json to_json() const;
  friend bool operator==(const CommandEnvelope&, const CommandEnvelope&) = default;
};

/// {"actions": [{"object": ref, "block": "grabbable" | "hand_follow", ...}]}
const nlohmann::json& fusion_schema();
/// {"speech": "..."}
const nlohmann::json& conversation_schema();
/// Schema a refined response for `type` must satisfy.
const nlohmann::json& task_schema(TaskType type);
/// Top-level key holding the list in a command payload ("objects",
/// "animations", "actions"); empty for Converse.
std::string_view payload_key(TaskType type) noexcept;

}  // namespace scenewright
