#include "scenewright/command.hpp"

#include "scenewright/animation.hpp"
#include "scenewright/object_creator.hpp"

namespace scenewright {

std::string_view to_string(TaskType type) noexcept {
  switch (type) {
    case TaskType::Create: return "create";
    case TaskType::Animate: return "animate";
    case TaskType::Fuse: return "fuse";
    case TaskType::Converse: return "converse";
  }
  return "converse";
}

std::optional<TaskType> task_type_from_string(std::string_view name) noexcept {
  for (auto t : {TaskType::Create, TaskType::Animate, TaskType::Fuse, TaskType::Converse})
    if (to_string(t) == name) return t;
  return std::nullopt;
}

nlohmann::json CommandEnvelope::to_json() const {
  return {{"task_type", std::string(to_string(task_type))}, {"payload", payload}, {"speech_text", speech_text}};
}

const nlohmann::json& fusion_schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["actions"],
    "additionalProperties": false,
    "properties": {
      "actions": {
        "type": "array",
        "minItems": 1,
        "items": {
          "type": "object",
          "required": ["object", "block"],
          "additionalProperties": false,
          "properties": {
            "object": {"type": ["string", "object"]},
            "block": {"type": "string", "minLength": 1},
            "hand": {"enum": ["left", "right"]},
            "offset": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}}
          }
        }
      }
    }
  })");
  return kSchema;
}

const nlohmann::json& conversation_schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["speech"],
    "additionalProperties": false,
    "properties": {"speech": {"type": "string"}}
  })");
  return kSchema;
}

const nlohmann::json& task_schema(TaskType type) {
  switch (type) {
    case TaskType::Create: return creation_schema();
    case TaskType::Animate: return animation_schema();
    case TaskType::Fuse: return fusion_schema();
    case TaskType::Converse: return conversation_schema();
  }
  return conversation_schema();
}

std::string_view payload_key(TaskType type) noexcept {
  switch (type) {
    case TaskType::Create: return "objects";
    case TaskType::Animate: return "animations";
    case TaskType::Fuse: return "actions";
    case TaskType::Converse: return "";
  }
  return "";
}

}  // namespace scenewright
