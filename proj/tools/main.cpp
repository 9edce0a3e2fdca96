#include "scenewright/error.hpp"
#include "scenewright/gateway/bench.hpp"
#include "scenewright/gateway/config.hpp"
#include "scenewright/gateway/replay.hpp"
#include "scenewright/gateway/server.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <pthread.h>

namespace gw = scenewright::gateway;

namespace {

int serve(const std::string& config_path) {
  // Block the shutdown signals before any thread exists so every thread
  // inherits the mask and only sigwait below sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const gw::ServerConfig config = gw::load_config(config_path);
  gw::Server server(config, gw::make_provider(config));
  server.start();
  std::cerr << "listening tcp " << config.host << ":" << server.tcp_port();
  if (auto ws = server.ws_port()) std::cerr << ", ws " << *ws;
  std::cerr << std::endl;

  int received = 0;
  sigwait(&signals, &received);
  std::cerr << "shutting down" << std::endl;
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scenewright: LLM-driven scene editing engine"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the TCP/WebSocket server");
  serve_cmd->add_option("--config", config_path, "Server config (JSON)")->required()->check(CLI::ExistingFile);

  std::string transcript, script, golden;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a task script against a recorded transcript");
  replay_cmd->add_option("--transcript", transcript, "Recorded transcript")->required();
  replay_cmd->add_option("--script", script, "Task script")->required();

  auto* record_cmd = app.add_subcommand("record", "Record a transcript and golden from authored responses");
  record_cmd->add_option("--script", script, "Task script")->required();
  record_cmd->add_option("--transcript", transcript, "Transcript to write")->required();
  record_cmd->add_option("--golden", golden, "Golden to write")->required();

  std::vector<std::size_t> sizes;
  std::uint64_t seed = 7;
  auto* bench_cmd = app.add_subcommand("bench", "Context size with and without selective retrieval (CSV)");
  bench_cmd->add_option("--scene-size", sizes, "Number of virtual objects")->required();
  bench_cmd->add_option("--seed", seed, "Scene generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(config_path);
    if (*replay_cmd) {
      std::cout << gw::replay(transcript, script).text();
      return 0;
    }
    if (*record_cmd) {
      gw::record(script, transcript, golden);
      return 0;
    }
    if (*bench_cmd) {
      std::cout << gw::ContextReductionRow::csv_header() << '\n';
      for (std::size_t n : sizes) std::cout << gw::measure_context_reduction(n, seed).csv() << '\n';
      return 0;
    }
  } catch (const scenewright::Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
