#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace scenewright::llm {

struct TokenUsage {
  std::string request_id;
  std::string stage;  // "initial" or "refined"
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
};

struct UsageTotals {
  std::string request_id;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::size_t calls = 0;

  [[nodiscard]] nlohmann::json to_json() const;
};

struct UsageAverage {
  double input_tokens = 0.0;
  double output_tokens = 0.0;
  std::size_t requests = 0;
};

/// Per-request token totals. Thread-safe.
class UsageLedger {
 public:
  UsageTotals account(const std::string& request_id, const std::vector<TokenUsage>& calls);
  [[nodiscard]] std::optional<UsageTotals> totals(const std::string& request_id) const;
  /// Mean over the last `window` requests (all of them when 0).
  [[nodiscard]] UsageAverage rolling_average(std::size_t window = 0) const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] nlohmann::json to_json() const;
  void flush(const std::filesystem::path& path) const;

 private:
  mutable std::mutex mutex_;
  std::vector<UsageTotals> requests_;
};

}  // namespace scenewright::llm
