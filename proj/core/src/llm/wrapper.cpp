#include "scenewright/llm/wrapper.hpp"

#include "scenewright/error.hpp"

#include <chrono>

namespace scenewright::llm {

ContextPayload LocalEngineAccess::retrieve(const std::vector<ContextCategory>& request, const HistoryQueue& history,
                                           const std::vector<CommandEnvelope>& pending) {
  if (pending.empty()) return engine_.retrieve(request, &history);
  return engine_.preview(pending).retrieve(request, &history);
}

DispatchOutcome LocalEngineAccess::dispatch(const CommandEnvelope& command) { return engine_.dispatch(command); }

nlohmann::json RequestResult::to_json() const {
  nlohmann::json subs = nlohmann::json::array();
  for (const auto& s : subtasks) {
    nlohmann::json j = {{"task_type", std::string(scenewright::to_string(s.subtask.task_type))},
                        {"request", s.subtask.request}};
    if (s.command) j["command"] = s.command->to_json();
    if (s.outcome) j["outcome"] = s.outcome->to_json();
    if (!s.error.empty()) j["error"] = s.error;
    subs.push_back(std::move(j));
  }
  return {{"request_id", request_id},
          {"speech", speech},
          {"warnings", warnings},
          {"subtasks", std::move(subs)},
          {"usage", usage.to_json()},
          {"provider_failed", provider_failed}};
}

RequestResult Wrapper::handle_request(const std::string& text, HistoryQueue& history, EngineAccess& engine,
                                      const std::string& request_id) {
  const auto started = std::chrono::steady_clock::now();
  RequestResult result;
  result.request_id = request_id;
  std::vector<TokenUsage> calls;
  auto note = [&](const std::string& message) {
    result.warnings.push_back(message);
    engine.warn(message);
  };
  auto finish = [&]() -> RequestResult {
    result.usage = ledger_.account(request_id, calls);
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return std::move(result);
  };

  history.record(text);
  const PromptEnvelope initial = build_initial_prompt(text, history.messages());
  Completion reply;
  try {
    reply = provider_.complete(initial);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ProviderUnavailable) throw;
    result.provider_failed = true;
    note(std::string("request '") + request_id + "' failed: " + e.what());
    return finish();
  }
  calls.push_back({request_id, "initial", reply.input_tokens, reply.output_tokens});

  TaskDecomposition plan;
  try {
    plan = parse_initial_response(reply.text);
  } catch (const Error& e) {
    note(std::string("initial response rejected: ") + e.what());
    return finish();
  }

  // Commands are collected first and dispatched only once every refined call
  // has answered, so a provider failure leaves the engine untouched. Later
  // subtasks still see the effect of earlier ones through a preview.
  std::vector<CommandEnvelope> accepted;
  std::vector<std::size_t> accepted_index;
  for (std::size_t i = 0; i < plan.subtasks.size(); ++i) {
    SubtaskReport report;
    report.subtask = plan.subtasks[i];
    try {
      const ContextPayload context = engine.retrieve(report.subtask.categories, history, accepted);
      const PromptEnvelope refined = build_refined_prompt(report.subtask, context);
      try {
        reply = provider_.complete(refined);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ProviderUnavailable) throw;
        result.provider_failed = true;
        result.subtasks.clear();
        note(std::string("request '") + request_id + "' failed: " + e.what());
        return finish();
      }
      calls.push_back({request_id, "refined", reply.input_tokens, reply.output_tokens});
      report.command = parse_refined_response(reply.text, report.subtask.task_type);
      accepted.push_back(*report.command);
      accepted_index.push_back(i);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TranscriptMiss) throw;
      report.error = e.what();
      note("subtask " + std::to_string(i + 1) + " (" + std::string(scenewright::to_string(report.subtask.task_type)) +
           ") rejected: " + e.what());
    }
    result.subtasks.push_back(std::move(report));
  }

  for (std::size_t k = 0; k < accepted.size(); ++k) {
    SubtaskReport& report = result.subtasks[accepted_index[k]];
    try {
      report.outcome = engine.dispatch(accepted[k]);
      result.executed.push_back(accepted[k]);
      if (!accepted[k].speech_text.empty()) result.speech.push_back(accepted[k].speech_text);
    } catch (const Error& e) {
      report.error = e.what();
      note("subtask " + std::to_string(accepted_index[k] + 1) + " not executed: " + e.what());
    }
  }
  return finish();
}

}  // namespace scenewright::llm
