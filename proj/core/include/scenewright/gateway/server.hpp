#pragma once

#include "scenewright/gateway/config.hpp"
#include "scenewright/llm/provider.hpp"

#include <cstdint>
#include <memory>
#include <optional>

namespace scenewright::gateway {

/// Scripted mock or HTTP client, per the config.
std::unique_ptr<llm::LLMProvider> make_provider(const ServerConfig& config);

/// TCP (length-prefixed frames) and optional WebSocket front end around one
/// engine. Threads: one for socket I/O, one engine loop that is the only
/// scene mutator, and one worker per in-flight user request.
class Server {
 public:
  /// Loads the prefab registry and room scan named by the config.
  Server(ServerConfig config, std::unique_ptr<llm::LLMProvider> provider);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the listeners and starts all threads. Throws BindFailure.
  void start();
  /// Blocks until stop() is called from another thread.
  void wait();
  /// Stops accepting, finishes in-flight work, flushes the usage ledger.
  void stop();

  [[nodiscard]] std::uint16_t tcp_port() const;
  [[nodiscard]] std::optional<std::uint16_t> ws_port() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace scenewright::gateway
