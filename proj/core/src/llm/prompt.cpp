#include "scenewright/llm/prompt.hpp"

#include "scenewright/canonical_json.hpp"
#include "scenewright/error.hpp"
#include "scenewright/json_schema.hpp"
#include "scenewright/llm/json_extract.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <map>

namespace scenewright::llm {

// Defined in the generated prompt_assets.cpp.
const std::map<std::string_view, std::string_view>& prompt_assets();

std::string_view to_string(PromptStage stage) noexcept {
  return stage == PromptStage::Initial ? "initial" : "refined";
}

std::string_view prompt_asset(std::string_view name) {
  const auto& assets = prompt_assets();
  auto it = assets.find(name);
  if (it == assets.end()) throw Error(ErrorCode::NotFound, "prompt asset '" + std::string(name) + "'");
  return it->second;
}

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string out;
  out.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof(buf), "%02x", md[i]);
    out += buf;
  }
  return out;
}

namespace {

std::string render(std::string_view templ, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < templ.size()) {
    const std::size_t open = templ.find("{{", pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = templ.find("}}", open);
    if (close == std::string_view::npos) break;
    out.append(templ.substr(pos, open - pos));
    const std::string key(templ.substr(open + 2, close - open - 2));
    auto it = values.find(key);
    if (it != values.end()) out += it->second;
    else out.append(templ.substr(open, close + 2 - open));
    pos = close + 2;
  }
  out.append(templ.substr(pos));
  return out;
}

std::string category_catalog() {
  std::string out;
  for (const auto& cat : all_categories()) {
    out += "- ";
    out += to_string(cat.kind);
    out += ": ";
    if (cat.properties.empty()) {
      out += "(no properties)";
    } else {
      bool first = true;
      for (Property p : cat.properties) {
        if (!first) out += ", ";
        first = false;
        out += to_string(p);
      }
    }
    out += '\n';
  }
  return out;
}

std::string numbered(const std::vector<std::string>& lines) {
  if (lines.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += std::to_string(i + 1) + ". " + lines[i];
  }
  return out;
}

[[noreturn]] void rethrow_at(const Error& e, const std::string& path) {
  throw Error(e.code(), path + ": " + e.detail());
}

}  // namespace

nlohmann::json PromptEnvelope::to_json() const {
  nlohmann::json context_json = nullptr;
  if (context) {
    context_json = nlohmann::json::object();
    for (const auto& [kind, text] : context->sections) context_json[std::string(scenewright::to_string(kind))] = text;
  }
  return {{"stage", std::string(llm::to_string(stage))},
          {"task_type", task_type ? nlohmann::json(std::string(scenewright::to_string(*task_type))) : nlohmann::json(nullptr)},
          {"system_text", system_text},
          {"user_text", user_text},
          {"user_message", user_message},
          {"schema", schema},
          {"context", std::move(context_json)},
          {"history", history}};
}

std::string PromptEnvelope::digest() const { return sha256_hex(canonical_dump(to_json())); }

const nlohmann::json& decomposition_schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["subtasks"],
    "additionalProperties": false,
    "properties": {
      "subtasks": {
        "type": "array",
        "minItems": 1,
        "items": {
          "type": "object",
          "required": ["task_type", "request", "categories"],
          "additionalProperties": false,
          "properties": {
            "task_type": {"enum": ["create", "animate", "fuse", "converse"]},
            "request": {"type": "string", "minLength": 1},
            "categories": {
              "type": "array",
              "items": {"anyOf": [
                {"enum": ["resources", "virtual_objects", "real_world", "animations", "user_context", "history"]},
                {
                  "type": "object",
                  "required": ["kind"],
                  "additionalProperties": false,
                  "properties": {
                    "kind": {"enum": ["resources", "virtual_objects", "real_world", "animations", "user_context", "history"]},
                    "properties": {"type": "array", "items": {"enum": [
                      "position", "orientation", "scale", "size", "color", "tags", "parent", "id"
                    ]}}
                  }
                }
              ]}
            }
          }
        }
      }
    }
  })");
  return kSchema;
}

PromptEnvelope build_initial_prompt(const std::string& text, const std::vector<std::string>& history) {
  PromptEnvelope env;
  env.stage = PromptStage::Initial;
  env.schema = decomposition_schema();
  env.system_text = render(prompt_asset("initial_system"),
                           {{"categories", category_catalog()}, {"schema", env.schema.dump(2)}});
  env.user_text = text;
  env.history = history;
  env.user_message = render(prompt_asset("initial_user"), {{"history", numbered(history)}, {"request", text}});
  return env;
}

TaskDecomposition parse_initial_response(std::string_view text) {
  auto extracted = extract_json(text);
  if (!extracted) throw Error(ErrorCode::NoJSONFound, "initial response contains no JSON");
  nlohmann::json doc = std::move(extracted->value);
  if (doc.is_array()) doc = {{"subtasks", std::move(doc)}};
  require_schema(decomposition_schema(), doc);

  TaskDecomposition out;
  const auto& subtasks = doc.at("subtasks");
  for (std::size_t i = 0; i < subtasks.size(); ++i) {
    const auto& item = subtasks[i];
    Subtask st;
    st.task_type = *task_type_from_string(item.at("task_type").get<std::string>());
    st.request = item.at("request").get<std::string>();
    const auto& cats = item.at("categories");
    for (std::size_t k = 0; k < cats.size(); ++k) {
      try {
        st.categories.push_back(parse_category(cats[k]));
      } catch (const Error& e) {
        rethrow_at(e, "/subtasks/" + std::to_string(i) + "/categories/" + std::to_string(k));
      }
    }
    out.subtasks.push_back(std::move(st));
  }
  return out;
}

PromptEnvelope build_refined_prompt(const Subtask& subtask, const ContextPayload& payload) {
  std::set<CategoryKind> wanted;
  for (const auto& c : subtask.categories) wanted.insert(c.kind);
  if (wanted != payload.kinds()) {
    auto names = [](const std::set<CategoryKind>& kinds) {
      std::string s = "[";
      for (auto k : kinds) s += (s.size() > 1 ? "," : "") + std::string(to_string(k));
      return s + "]";
    };
    throw Error(ErrorCode::CategoryMismatch,
                "subtask asks for " + names(wanted) + " but context holds " + names(payload.kinds()));
  }
  PromptEnvelope env;
  env.stage = PromptStage::Refined;
  env.task_type = subtask.task_type;
  env.schema = task_schema(subtask.task_type);
  const std::string guidance_name = "guidance_" + std::string(to_string(subtask.task_type));
  env.system_text = render(prompt_asset("refined_system"), {{"task_type", std::string(to_string(subtask.task_type))},
                                                            {"guidance", std::string(prompt_asset(guidance_name))},
                                                            {"schema", env.schema.dump(2)}});
  env.user_text = subtask.request;
  env.context = payload;
  env.user_message = render(prompt_asset("refined_user"),
                            {{"context", payload.sections.empty() ? std::string("(none)\n") : payload.render()},
                             {"request", subtask.request}});
  return env;
}

CommandEnvelope parse_refined_response(std::string_view text, TaskType task_type) {
  CommandEnvelope cmd;
  cmd.task_type = task_type;
  auto extracted = extract_json(text);
  if (!extracted) {
    if (task_type != TaskType::Converse)
      throw Error(ErrorCode::NoJSONFound, std::string(to_string(task_type)) + " response contains no JSON");
    cmd.speech_text = plain_text(text);
    return cmd;
  }
  nlohmann::json payload = std::move(extracted->value);
  const std::string_view key = payload_key(task_type);
  if (!key.empty() && payload.is_array()) payload = {{std::string(key), std::move(payload)}};
  require_schema(task_schema(task_type), payload);

  std::string rest(text.substr(0, extracted->begin));
  rest += ' ';
  rest += text.substr(extracted->end);
  cmd.speech_text = plain_text(rest);
  if (task_type == TaskType::Converse) {
    const std::string spoken = plain_text(payload.at("speech").get<std::string>());
    if (!spoken.empty()) cmd.speech_text = cmd.speech_text.empty() ? spoken : cmd.speech_text + " " + spoken;
  }
  cmd.payload = std::move(payload);
  return cmd;
}

}  // namespace scenewright::llm
