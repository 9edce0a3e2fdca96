#include "scenewright/gateway/config.hpp"

#include "scenewright/error.hpp"
#include "scenewright/json_schema.hpp"

#include <fstream>

namespace scenewright::gateway {

namespace {

const nlohmann::json& config_schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["provider"],
    "additionalProperties": false,
    "properties": {
      "listen": {
        "type": "object",
        "additionalProperties": false,
        "properties": {
          "host": {"type": "string", "minLength": 1},
          "tcp_port": {"type": "integer", "minimum": 0, "maximum": 65535},
          "ws_port": {"type": "integer", "minimum": 0, "maximum": 65535}
        }
      },
      "provider": {
        "type": "object",
        "required": ["kind"],
        "additionalProperties": false,
        "properties": {
          "kind": {"enum": ["scripted", "http"]},
          "transcript": {"type": "string", "minLength": 1},
          "endpoint": {"type": "string", "minLength": 1},
          "model": {"type": "string"},
          "api_key_env": {"type": "string"},
          "timeout_seconds": {"type": "number", "exclusiveMinimum": 0},
          "structured_output": {"type": "boolean"}
        }
      },
      "room_scan": {"type": "string", "minLength": 1},
      "prefabs": {"type": "string", "minLength": 1},
      "usage_ledger": {"type": "string", "minLength": 1},
      "timestep": {"type": "number", "exclusiveMinimum": 0},
      "snapshot_cadence": {"type": "integer", "minimum": 1},
      "tick_interval_ms": {"type": "number", "minimum": 0}
    }
  })");
  return kSchema;
}

std::optional<std::string> find_api_key(const nlohmann::json& value, const std::string& path) {
  if (value.is_object()) {
    for (const auto& [key, child] : value.items()) {
      if (key == "api_key") return path + "/" + key;
      if (auto found = find_api_key(child, path + "/" + key)) return found;
    }
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i)
      if (auto found = find_api_key(value[i], path + "/" + std::to_string(i))) return found;
  }
  return std::nullopt;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ServerConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir) {
  if (auto key = find_api_key(document, ""))
    throw Error(ErrorCode::ConfigInvalid, *key + ": API keys are read from the environment (see api_key_env)");
  if (auto issue = validate_schema(config_schema(), document))
    throw Error(ErrorCode::ConfigInvalid, (issue->path.empty() ? "/" : issue->path) + ": " + issue->message);

  ServerConfig cfg;
  if (auto it = document.find("listen"); it != document.end()) {
    cfg.host = it->value("host", cfg.host);
    cfg.tcp_port = it->value("tcp_port", cfg.tcp_port);
    if (it->contains("ws_port")) cfg.ws_port = (*it)["ws_port"].get<std::uint16_t>();
  }
  const auto& provider = document.at("provider");
  if (provider.at("kind") == "scripted") {
    cfg.provider = ProviderKind::Scripted;
    if (!provider.contains("transcript"))
      throw Error(ErrorCode::ConfigInvalid, "/provider/transcript: required for the scripted provider");
    cfg.transcript = resolve(base_dir, provider["transcript"].get<std::string>());
  } else {
    cfg.provider = ProviderKind::Http;
    if (!provider.contains("endpoint"))
      throw Error(ErrorCode::ConfigInvalid, "/provider/endpoint: required for the http provider");
    cfg.http.endpoint = provider["endpoint"].get<std::string>();
    if (cfg.http.endpoint.find("://") == std::string::npos)
      throw Error(ErrorCode::ConfigInvalid, "/provider/endpoint: expected scheme://host[:port]/path");
    cfg.http.model = provider.value("model", std::string{});
    cfg.http.api_key_env = provider.value("api_key_env", std::string{});
    cfg.http.timeout_seconds = provider.value("timeout_seconds", 30.0);
    cfg.http.structured_output = provider.value("structured_output", false);
  }
  if (auto it = document.find("room_scan"); it != document.end()) cfg.room_scan = resolve(base_dir, it->get<std::string>());
  if (auto it = document.find("prefabs"); it != document.end()) cfg.prefabs = resolve(base_dir, it->get<std::string>());
  if (auto it = document.find("usage_ledger"); it != document.end())
    cfg.usage_ledger = resolve(base_dir, it->get<std::string>());
  cfg.timestep = document.value("timestep", cfg.timestep);
  cfg.snapshot_cadence = document.value("snapshot_cadence", cfg.snapshot_cadence);
  cfg.tick_interval_ms = document.value("tick_interval_ms", cfg.timestep * 1000.0);
  return cfg;
}

ServerConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::FixtureMissing, path.string());
  const auto doc = nlohmann::json::parse(f, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ConfigInvalid, "/: " + path.string() + " is not valid JSON");
  return parse_config(doc, path.parent_path());
}

}  // namespace scenewright::gateway
