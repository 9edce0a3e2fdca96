#include "scenewright/gateway/replay.hpp"

#include "scenewright/canonical_json.hpp"
#include "scenewright/error.hpp"
#include "scenewright/prefab_registry.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace scenewright::gateway {

namespace fs = std::filesystem;

nlohmann::json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::FixtureMissing, path.string());
  auto doc = nlohmann::json::parse(f, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::SchemaViolation, "/: " + path.string() + " is not valid JSON");
  return doc;
}

void write_json(const fs::path& path, const nlohmann::json& value) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::FixtureMissing, "cannot write " + path.string());
  f << canonicalize(value).dump(2) << '\n';
}

namespace {

void parse_script(const nlohmann::json& doc, const fs::path& path, TaskScript& s) {
  s.directory = path.parent_path();
  s.name = doc.value("name", path.stem().string());
  auto file = [&](const char* key) -> std::optional<fs::path> {
    if (!doc.contains(key)) return std::nullopt;
    const fs::path p = s.directory / doc[key].get<std::string>();
    return p;
  };
  s.prefabs = file("prefabs");
  s.room_scan = file("room_scan");
  s.responses = file("responses");
  s.golden = *file("golden");
  s.timestep = doc.value("timestep", 0.02);
  s.steps = doc["steps"];
}

}  // namespace

TaskScript load_task_script(const fs::path& path) {
  const nlohmann::json doc = read_json(path);
  if (!doc.is_object() || !doc.contains("steps") || !doc["steps"].is_array() || !doc.contains("golden"))
    throw Error(ErrorCode::SchemaViolation, "/: task script needs \"steps\" and \"golden\"");
  TaskScript s;
  try {
    parse_script(doc, path, s);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, path.string() + ": " + e.what());
  }
  for (const auto& p : {s.prefabs, s.room_scan})
    if (p && !fs::exists(*p)) throw Error(ErrorCode::FixtureMissing, p->string());
  return s;
}

namespace {

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

std::optional<std::string> diff(const nlohmann::json& a, const nlohmann::json& b, const std::string& path) {
  if (a.type() != b.type() && !(a.is_number() && b.is_number())) return path.empty() ? "/" : path;
  if (a.is_object()) {
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
      if (ia == a.end()) return path + "/" + escape_pointer(ib.key());
      if (ib == b.end() || ia.key() != ib.key()) return path + "/" + escape_pointer(ia.key());
      if (auto d = diff(ia.value(), ib.value(), path + "/" + escape_pointer(ia.key()))) return d;
      ++ia;
      ++ib;
    }
    return std::nullopt;
  }
  if (a.is_array()) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
      if (auto d = diff(a[i], b[i], path + "/" + std::to_string(i))) return d;
    if (a.size() != b.size()) return path + "/" + std::to_string(n);
    return std::nullopt;
  }
  if (canonical_dump(a) != canonical_dump(b)) return path.empty() ? "/" : path;
  return std::nullopt;
}

Hand hand_arg(const nlohmann::json& v) {
  const auto h = v.is_string() ? hand_from_string(v.get_ref<const std::string&>()) : std::nullopt;
  if (!h) throw Error(ErrorCode::SchemaViolation, "hand must be \"left\" or \"right\"");
  return *h;
}

std::vector<llm::Completion> authored_calls(const nlohmann::json& authored) {
  std::vector<llm::Completion> calls;
  for (const auto& request : authored) {
    for (const auto& call : request.at("calls")) {
      llm::Completion c;
      if (call.contains("json")) {
        c.text = call.value("prose", std::string{});
        if (!c.text.empty()) c.text += ' ';
        c.text += call["json"].dump();
        if (call.contains("after")) c.text += " " + call["after"].get<std::string>();
      } else {
        c.text = call.at("text").get<std::string>();
      }
      c.input_tokens = call.value("input_tokens", std::int64_t{0});
      c.output_tokens = call.value("output_tokens", std::int64_t{0});
      calls.push_back(std::move(c));
    }
  }
  return calls;
}

}  // namespace

std::optional<std::string> first_difference(const nlohmann::json& expected, const nlohmann::json& actual) {
  return diff(canonicalize(expected), canonicalize(actual), "");
}

TaskRun run_task(const TaskScript& script, llm::LLMProvider& provider) {
  PrefabRegistry prefabs = script.prefabs ? PrefabRegistry::from_json(read_json(*script.prefabs)) : PrefabRegistry{};
  Engine engine(std::move(prefabs), EngineOptions{script.timestep});
  if (script.room_scan) engine.load_room_scan(read_json(*script.room_scan));

  llm::UsageLedger ledger;
  llm::Wrapper wrapper(provider, ledger);
  llm::LocalEngineAccess access(engine);
  HistoryQueue history;

  TaskRun run;
  nlohmann::json requests = nlohmann::json::array();
  nlohmann::json events = nlohmann::json::array();
  nlohmann::json checkpoints = nlohmann::json::object();
  nlohmann::json warnings = nlohmann::json::array();
  auto log_events = [&](const std::vector<AnimationEvent>& evs) {
    for (const auto& e : evs)
      if (e.kind != "progressed") events.push_back(e.to_json());
  };
  auto drain_warnings = [&] {
    for (const auto& w : engine.take_warnings()) warnings.push_back({{"tick", w.tick}, {"message", w.message}});
  };

  std::size_t request_count = 0;
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const auto& step = script.steps[i];
    const std::string path = "/steps/" + std::to_string(i);
    try {
      if (step.contains("request")) {
        const std::string id = script.name + "-" + std::to_string(++request_count);
        auto result = wrapper.handle_request(step["request"].get<std::string>(), history, access, id);
        requests.push_back({{"request_id", id},
                            {"speech", result.speech},
                            {"warnings", result.warnings},
                            {"usage", result.usage.to_json()}});
        run.requests.push_back(std::move(result));
      } else if (step.contains("ticks")) {
        const auto n = step["ticks"].get<std::uint64_t>();
        for (std::uint64_t t = 0; t < n; ++t) log_events(engine.tick().events);
      } else if (step.contains("hand_pose")) {
        engine.update_hand_pose(parse_hand_pose(step["hand_pose"]));
      } else if (step.contains("head_pose")) {
        HeadPose head;
        const auto& h = step["head_pose"];
        if (h.contains("position")) head.position = parse_vec3(h["position"]).value_or(head.position);
        if (h.contains("orientation")) {
          const Vec3 e = parse_vec3(h["orientation"]).value_or(Vec3::Zero());
          head.orientation = Euler{e.x(), e.y(), e.z()}.normalized();
        }
        engine.set_head_pose(head);
      } else if (step.contains("pick")) {
        const auto& p = step["pick"];
        const auto ref = parse_object_ref(p.at("object"));
        if (!ref) throw Error(ErrorCode::SchemaViolation, path + "/pick/object: bad reference");
        engine.pick(*ref, hand_arg(p.value("hand", nlohmann::json("right"))));
      } else if (step.contains("release")) {
        engine.release(hand_arg(step["release"]));
      } else if (step.contains("stop")) {
        log_events(engine.stop_animation(step["stop"].get<std::string>()));
      } else if (step.contains("checkpoint")) {
        checkpoints[step["checkpoint"].get<std::string>()] = engine.snapshot().to_json();
      } else {
        throw Error(ErrorCode::SchemaViolation, path + ": unknown step");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::TranscriptMiss || e.code() == ErrorCode::SchemaViolation) throw;
      engine.warn(path + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::SchemaViolation, path + ": " + e.what());
    }
    drain_warnings();
  }

  run.document = {{"task", script.name},
                  {"requests", std::move(requests)},
                  {"events", std::move(events)},
                  {"checkpoints", std::move(checkpoints)},
                  {"final_snapshot", engine.snapshot().to_json()},
                  {"warnings", std::move(warnings)}};
  return run;
}

std::string ReplayReport::text() const {
  std::ostringstream out;
  out << "task " << task << ": golden match\n";
  for (std::size_t i = 0; i < usage.size(); ++i) {
    char line[256];
    std::snprintf(line, sizeof(line), "  %s input_tokens=%lld output_tokens=%lld calls=%zu wall_ms=%.3f\n",
                  usage[i].request_id.c_str(), static_cast<long long>(usage[i].input_tokens),
                  static_cast<long long>(usage[i].output_tokens), usage[i].calls,
                  i < wall_seconds.size() ? wall_seconds[i] * 1e3 : 0.0);
    out << line;
  }
  return out.str();
}

ReplayReport replay(const fs::path& transcript, const fs::path& script_path) {
  const TaskScript script = load_task_script(script_path);
  const auto mock = llm::ScriptedMock::load(transcript);
  if (!fs::exists(script.golden)) throw Error(ErrorCode::FixtureMissing, script.golden.string());
  const nlohmann::json golden = read_json(script.golden);
  const TaskRun run = run_task(script, *mock);
  if (auto where = first_difference(golden, run.document))
    throw Error(ErrorCode::GoldenMismatch, *where + " differs from " + script.golden.string());
  ReplayReport report;
  report.task = script.name;
  for (const auto& r : run.requests) {
    report.usage.push_back(r.usage);
    report.wall_seconds.push_back(r.wall_seconds);
  }
  return report;
}

void record(const fs::path& script_path, const fs::path& transcript_out, const fs::path& golden_out) {
  const TaskScript script = load_task_script(script_path);
  if (!script.responses) throw Error(ErrorCode::FixtureMissing, script_path.string() + " names no responses file");
  const nlohmann::json authored = read_json(*script.responses);
  std::vector<llm::Completion> calls;
  try {
    calls = authored_calls(authored);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaViolation, script.responses->string() + ": " + e.what());
  }
  llm::SequenceProvider sequence(std::move(calls));
  llm::RecordingProvider recorder(sequence);
  const TaskRun run = run_task(script, recorder);
  if (sequence.remaining() != 0)
    throw Error(ErrorCode::SchemaViolation,
                std::to_string(sequence.remaining()) + " authored responses were never requested");
  write_json(transcript_out, llm::to_json(recorder.transcript()));
  write_json(golden_out, run.document);
}

}  // namespace scenewright::gateway
