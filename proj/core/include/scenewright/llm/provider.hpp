#pragma once

#include "scenewright/llm/prompt.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace scenewright::llm {

struct Completion {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

class LLMProvider {
 public:
  virtual ~LLMProvider() = default;
  /// Throws ProviderUnavailable when the model cannot be reached.
  virtual Completion complete(const PromptEnvelope& envelope) = 0;
  [[nodiscard]] virtual bool structured_output() const { return false; }
};

struct TranscriptEntry {
  std::string envelope_digest;
  std::string response_text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

nlohmann::json to_json(const std::vector<TranscriptEntry>& transcript);
std::vector<TranscriptEntry> transcript_from_json(const nlohmann::json& document);

/// Deterministic stand-in keyed by envelope digest. A digest with no entry
/// throws TranscriptMiss.
class ScriptedMock : public LLMProvider {
 public:
  explicit ScriptedMock(const std::vector<TranscriptEntry>& transcript);
  /// Throws FixtureMissing if the file cannot be read.
  static std::unique_ptr<ScriptedMock> load(const std::filesystem::path& path);

  Completion complete(const PromptEnvelope& envelope) override;
  [[nodiscard]] std::size_t calls() const;

 private:
  std::map<std::string, TranscriptEntry> entries_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// Answers in a fixed order regardless of prompt; used to author transcripts.
class SequenceProvider : public LLMProvider {
 public:
  explicit SequenceProvider(std::vector<Completion> responses) : responses_(responses.begin(), responses.end()) {}
  Completion complete(const PromptEnvelope& envelope) override;
  [[nodiscard]] std::size_t remaining() const { return responses_.size(); }

 private:
  std::deque<Completion> responses_;
};

/// Passes calls through and records a transcript entry for each.
class RecordingProvider : public LLMProvider {
 public:
  explicit RecordingProvider(LLMProvider& inner) : inner_(inner) {}
  Completion complete(const PromptEnvelope& envelope) override;
  [[nodiscard]] bool structured_output() const override { return inner_.structured_output(); }
  [[nodiscard]] const std::vector<TranscriptEntry>& transcript() const noexcept { return transcript_; }

 private:
  LLMProvider& inner_;
  std::vector<TranscriptEntry> transcript_;
};

struct ProviderConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8000/v1/chat/completions
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the key
  double timeout_seconds = 30.0;
  bool structured_output = false;
};

/// OpenAI-style chat-completions client.
class GenericHTTP : public LLMProvider {
 public:
  explicit GenericHTTP(ProviderConfig config);
  Completion complete(const PromptEnvelope& envelope) override;
  [[nodiscard]] bool structured_output() const override { return config_.structured_output; }
  /// Request body for `envelope` (exposed for tests).
  [[nodiscard]] nlohmann::json request_body(const PromptEnvelope& envelope) const;

 private:
  ProviderConfig config_;
};

}  // namespace scenewright::llm
