#pragma once

#include "scenewright/llm/provider.hpp"
#include "scenewright/llm/usage.hpp"
#include "scenewright/llm/wrapper.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace scenewright::gateway {

/// A scripted session: fixture files plus an ordered list of steps
/// ({"request": text}, {"ticks": n}, {"hand_pose": body}, {"head_pose": ..},
/// {"pick": {"object", "hand"}}, {"release": hand}, {"stop": id},
/// {"checkpoint": name}).
struct TaskScript {
  std::string name;
  std::filesystem::path directory;
  std::optional<std::filesystem::path> prefabs;
  std::optional<std::filesystem::path> room_scan;
  double timestep = 0.02;
  nlohmann::json steps = nlohmann::json::array();
  std::filesystem::path golden;
  std::optional<std::filesystem::path> responses;  // authoring input for `record`
};

/// Throws FixtureMissing if the script or a file it names is absent.
TaskScript load_task_script(const std::filesystem::path& path);

struct TaskRun {
  /// Everything a golden pins: per-request speech, warnings and usage, the
  /// non-progress event log, checkpoint and final snapshots, engine warnings.
  nlohmann::json document;
  std::vector<llm::RequestResult> requests;
};

TaskRun run_task(const TaskScript& script, llm::LLMProvider& provider);

/// JSON pointer of the first place `actual` departs from `expected` after
/// canonicalization; nullopt when they serialize identically.
std::optional<std::string> first_difference(const nlohmann::json& expected, const nlohmann::json& actual);

struct ReplayReport {
  std::string task;
  std::vector<llm::UsageTotals> usage;
  std::vector<double> wall_seconds;

  [[nodiscard]] std::string text() const;
};

/// Runs the script against the transcript and compares with its golden.
/// Throws FixtureMissing, TranscriptMiss, or GoldenMismatch (detail starts
/// with the first diverging path).
ReplayReport replay(const std::filesystem::path& transcript, const std::filesystem::path& script);

/// Runs the script's authored responses in call order, writing the digest-
/// keyed transcript and the golden it produces.
void record(const std::filesystem::path& script, const std::filesystem::path& transcript_out,
            const std::filesystem::path& golden_out);

/// Writes JSON as reviewable, stable text (canonical values, 2-space indent).
void write_json(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace scenewright::gateway
