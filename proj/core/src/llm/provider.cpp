#include "scenewright/llm/provider.hpp"

#include "scenewright/error.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>

namespace scenewright::llm {

nlohmann::json to_json(const std::vector<TranscriptEntry>& transcript) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : transcript)
    out.push_back({{"envelope_digest", e.envelope_digest},
                   {"response_text", e.response_text},
                   {"input_tokens", e.input_tokens},
                   {"output_tokens", e.output_tokens}});
  return out;
}

std::vector<TranscriptEntry> transcript_from_json(const nlohmann::json& document) {
  if (!document.is_array()) throw Error(ErrorCode::SchemaViolation, "/: transcript must be an array");
  std::vector<TranscriptEntry> out;
  for (std::size_t i = 0; i < document.size(); ++i) {
    const auto& item = document[i];
    const std::string path = "/" + std::to_string(i);
    if (!item.is_object() || !item.contains("envelope_digest") || !item["envelope_digest"].is_string() ||
        !item.contains("response_text") || !item["response_text"].is_string())
      throw Error(ErrorCode::SchemaViolation, path + ": needs envelope_digest and response_text strings");
    TranscriptEntry e;
    e.envelope_digest = item["envelope_digest"].get<std::string>();
    e.response_text = item["response_text"].get<std::string>();
    for (const char* key : {"input_tokens", "output_tokens"}) {
      auto it = item.find(key);
      if (it == item.end()) continue;
      if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
        throw Error(ErrorCode::SchemaViolation, path + "/" + key + ": must be a non-negative integer");
      (std::string_view(key) == "input_tokens" ? e.input_tokens : e.output_tokens) = it->get<std::int64_t>();
    }
    out.push_back(std::move(e));
  }
  return out;
}

ScriptedMock::ScriptedMock(const std::vector<TranscriptEntry>& transcript) {
  for (const auto& e : transcript) {
    auto [it, inserted] = entries_.try_emplace(e.envelope_digest, e);
    if (!inserted && it->second.response_text != e.response_text)
      throw Error(ErrorCode::SchemaViolation, "transcript has two responses for digest " + e.envelope_digest);
  }
}

std::unique_ptr<ScriptedMock> ScriptedMock::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::FixtureMissing, path.string());
  auto doc = nlohmann::json::parse(f, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::SchemaViolation, "/: " + path.string() + " is not valid JSON");
  return std::make_unique<ScriptedMock>(transcript_from_json(doc));
}

Completion ScriptedMock::complete(const PromptEnvelope& envelope) {
  const std::string digest = envelope.digest();
  std::lock_guard lock(mutex_);
  ++calls_;
  auto it = entries_.find(digest);
  if (it == entries_.end())
    throw Error(ErrorCode::TranscriptMiss,
                std::string(to_string(envelope.stage)) + " prompt for '" + envelope.user_text + "' (" + digest + ")");
  return {it->second.response_text, it->second.input_tokens, it->second.output_tokens};
}

std::size_t ScriptedMock::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

Completion SequenceProvider::complete(const PromptEnvelope& envelope) {
  if (responses_.empty())
    throw Error(ErrorCode::TranscriptMiss, "no scripted response left for '" + envelope.user_text + "'");
  Completion c = std::move(responses_.front());
  responses_.pop_front();
  return c;
}

Completion RecordingProvider::complete(const PromptEnvelope& envelope) {
  Completion c = inner_.complete(envelope);
  transcript_.push_back({envelope.digest(), c.text, c.input_tokens, c.output_tokens});
  return c;
}

GenericHTTP::GenericHTTP(ProviderConfig config) : config_(std::move(config)) {
  if (config_.endpoint.find("://") == std::string::npos)
    throw Error(ErrorCode::ConfigInvalid, "/provider/endpoint: expected scheme://host[:port]/path");
  if (!(config_.timeout_seconds > 0.0)) throw Error(ErrorCode::ConfigInvalid, "/provider/timeout_seconds: must be > 0");
}

nlohmann::json GenericHTTP::request_body(const PromptEnvelope& envelope) const {
  nlohmann::json body = {
      {"model", config_.model},
      {"temperature", 0},
      {"messages",
       {{{"role", "system"}, {"content", envelope.system_text}}, {{"role", "user"}, {"content", envelope.user_message}}}}};
  if (config_.structured_output)
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", std::string(to_string(envelope.stage)) + "_response"}, {"schema", envelope.schema}}}};
  return body;
}

Completion GenericHTTP::complete(const PromptEnvelope& envelope) {
  const std::size_t scheme_end = config_.endpoint.find("://");
  const std::size_t path_start = config_.endpoint.find('/', scheme_end + 3);
  const std::string base = config_.endpoint.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);

  httplib::Client client(base);
  const auto seconds = static_cast<time_t>(config_.timeout_seconds);
  const auto micros = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(path, headers, request_body(envelope).dump(), "application/json");
  if (!res) throw Error(ErrorCode::ProviderUnavailable, httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorCode::ProviderUnavailable, "HTTP " + std::to_string(res->status) + " from " + base);
  const auto doc = nlohmann::json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty())
    throw Error(ErrorCode::ProviderUnavailable, "unexpected response body");
  Completion c;
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object())
    throw Error(ErrorCode::ProviderUnavailable, "unexpected response body");
  const auto& content = choice["message"].value("content", nlohmann::json());
  if (content.is_string()) c.text = content.get<std::string>();
  if (auto usage = doc.find("usage"); usage != doc.end() && usage->is_object()) {
    auto count = [&](const char* key) {
      auto it = usage->find(key);
      return it != usage->end() && it->is_number_integer() ? it->get<std::int64_t>() : std::int64_t{0};
    };
    c.input_tokens = count("prompt_tokens");
    c.output_tokens = count("completion_tokens");
  }
  return c;
}

}  // namespace scenewright::llm
