#pragma once

#include "scenewright/engine.hpp"
#include "scenewright/llm/prompt.hpp"
#include "scenewright/llm/provider.hpp"
#include "scenewright/llm/usage.hpp"

#include <string>
#include <vector>

namespace scenewright::llm {

/// The wrapper's view of the engine: context retrieval and command dispatch.
class EngineAccess {
 public:
  virtual ~EngineAccess() = default;
  /// Context as it would be once `pending` commands are applied.
  virtual ContextPayload retrieve(const std::vector<ContextCategory>& request, const HistoryQueue& history,
                                  const std::vector<CommandEnvelope>& pending) = 0;
  virtual DispatchOutcome dispatch(const CommandEnvelope& command) = 0;
  virtual void warn(const std::string& message) = 0;
};

/// Direct access for single-threaded use (replay, tests, benchmarks).
class LocalEngineAccess : public EngineAccess {
 public:
  explicit LocalEngineAccess(Engine& engine) : engine_(engine) {}
  ContextPayload retrieve(const std::vector<ContextCategory>& request, const HistoryQueue& history,
                          const std::vector<CommandEnvelope>& pending) override;
  DispatchOutcome dispatch(const CommandEnvelope& command) override;
  void warn(const std::string& message) override { engine_.warn(message); }

 private:
  Engine& engine_;
};

struct SubtaskReport {
  Subtask subtask;
  std::optional<CommandEnvelope> command;
  std::optional<DispatchOutcome> outcome;
  std::string error;
};

struct RequestResult {
  std::string request_id;
  std::vector<CommandEnvelope> executed;
  std::vector<std::string> speech;
  std::vector<std::string> warnings;
  std::vector<SubtaskReport> subtasks;
  UsageTotals usage;
  double wall_seconds = 0.0;
  bool provider_failed = false;

  [[nodiscard]] nlohmann::json to_json() const;
};

class Wrapper {
 public:
  Wrapper(LLMProvider& provider, UsageLedger& ledger) : provider_(provider), ledger_(ledger) {}

  /// Records `text` in `history`, runs the initial stage and one refined
  /// stage per subtask, then dispatches the accepted commands in order.
  /// Rejected output only costs that subtask; an unreachable provider
  /// aborts the request before anything is dispatched.
  RequestResult handle_request(const std::string& text, HistoryQueue& history, EngineAccess& engine,
                               const std::string& request_id);

 private:
  LLMProvider& provider_;
  UsageLedger& ledger_;
};

}  // namespace scenewright::llm
