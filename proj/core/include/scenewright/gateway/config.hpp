#pragma once

#include "scenewright/llm/provider.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace scenewright::gateway {

enum class ProviderKind { Scripted, Http };

struct ServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t tcp_port = 7400;            // 0 picks a free port
  std::optional<std::uint16_t> ws_port;     // WebSocket listener, off when unset
  ProviderKind provider = ProviderKind::Scripted;
  std::filesystem::path transcript;         // scripted provider
  llm::ProviderConfig http;                 // http provider
  std::optional<std::filesystem::path> room_scan;
  std::optional<std::filesystem::path> prefabs;
  std::optional<std::filesystem::path> usage_ledger;
  double timestep = 0.02;
  std::uint32_t snapshot_cadence = 5;       // ticks per snapshot, per session default
  double tick_interval_ms = 20.0;           // wall-clock pacing of the engine loop
};

/// Validates a config document; relative paths resolve against `base_dir`.
/// Throws ConfigInvalid naming the offending field. API keys are read from
/// the environment only, so an "api_key" field anywhere is rejected.
ServerConfig parse_config(const nlohmann::json& document, const std::filesystem::path& base_dir = {});
/// Throws FixtureMissing if the file is absent, ConfigInvalid if it is not JSON.
ServerConfig load_config(const std::filesystem::path& path);

}  // namespace scenewright::gateway
