#include "scenewright/llm/usage.hpp"

#include <fstream>

namespace scenewright::llm {

nlohmann::json UsageTotals::to_json() const {
  return {{"request_id", request_id}, {"input_tokens", input_tokens}, {"output_tokens", output_tokens}, {"calls", calls}};
}

UsageTotals UsageLedger::account(const std::string& request_id, const std::vector<TokenUsage>& calls) {
  UsageTotals t;
  t.request_id = request_id;
  for (const auto& c : calls) {
    t.input_tokens += c.input_tokens;
    t.output_tokens += c.output_tokens;
  }
  t.calls = calls.size();
  std::lock_guard lock(mutex_);
  requests_.push_back(t);
  return t;
}

std::optional<UsageTotals> UsageLedger::totals(const std::string& request_id) const {
  std::lock_guard lock(mutex_);
  for (auto it = requests_.rbegin(); it != requests_.rend(); ++it)
    if (it->request_id == request_id) return *it;
  return std::nullopt;
}

UsageAverage UsageLedger::rolling_average(std::size_t window) const {
  std::lock_guard lock(mutex_);
  UsageAverage avg;
  const std::size_t n = window == 0 ? requests_.size() : std::min(window, requests_.size());
  if (n == 0) return avg;
  for (std::size_t i = requests_.size() - n; i < requests_.size(); ++i) {
    avg.input_tokens += static_cast<double>(requests_[i].input_tokens);
    avg.output_tokens += static_cast<double>(requests_[i].output_tokens);
  }
  avg.input_tokens /= static_cast<double>(n);
  avg.output_tokens /= static_cast<double>(n);
  avg.requests = n;
  return avg;
}

std::size_t UsageLedger::size() const {
  std::lock_guard lock(mutex_);
  return requests_.size();
}

nlohmann::json UsageLedger::to_json() const {
  std::lock_guard lock(mutex_);
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : requests_) out.push_back(r.to_json());
  return out;
}

void UsageLedger::flush(const std::filesystem::path& path) const {
  const nlohmann::json doc = to_json();
  std::ofstream f(path);
  f << doc.dump(2) << '\n';
}

}  // namespace scenewright::llm
