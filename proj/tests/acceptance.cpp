// One PASS/FAIL line per acceptance criterion. Limits are pinned below.
#include "scenewright/animation.hpp"
#include "scenewright/engine.hpp"
#include "scenewright/error.hpp"
#include "scenewright/gateway/bench.hpp"
#include "scenewright/gateway/replay.hpp"
#include "scenewright/llm/prompt.hpp"
#include "scenewright/llm/wrapper.hpp"
#include "scenewright/object_creator.hpp"
#include "support/generators.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <sstream>

namespace sw = scenewright;
using sw::testing::Gen;

namespace {

constexpr double kMaxContextRatio = 0.20;
constexpr double kMaxContextMs = 1000.0;
constexpr std::size_t kContextSceneSize = 200;
constexpr std::size_t kMinPropertiesPerObject = 10;
constexpr int kFuzzCases = 10000;
constexpr double kMaxFuzzSeconds = 60.0;
constexpr double kMaxReplaySeconds = 10.0;
constexpr int kKinematicCases = 200;
constexpr int kOrbitTicks = 10000;
constexpr double kKinematicTolerance = 1e-6;
constexpr int kHierarchyCases = 500;
constexpr double kHierarchyTolerance = 1e-6;
constexpr int kSupportCases = 500;
constexpr double kSupportTolerance = 1e-3;
constexpr int kHistoryRequests = 25;
constexpr std::size_t kHistoryWindow = 10;
constexpr double kDt = 0.02;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename... Args>
std::string format(const char* fmt, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

Outcome context_reduction() {
  Outcome out;
  const auto row = sw::gateway::measure_context_reduction(kContextSceneSize);
  out.detail = format("ratio=%.3f full=%lld selected=%lld props=%zu ms=%.1f", row.ratio,
                      static_cast<long long>(row.full_tokens), static_cast<long long>(row.selected_tokens),
                      row.properties_per_object, row.elapsed_ms);
  const auto again = sw::gateway::measure_context_reduction(kContextSceneSize);
  if (row.properties_per_object < kMinPropertiesPerObject) out.fail("too few properties: " + out.detail);
  if (row.ratio > kMaxContextRatio) out.fail("ratio above limit: " + out.detail);
  if (row.elapsed_ms > kMaxContextMs) out.fail("too slow: " + out.detail);
  if (again.full_tokens != row.full_tokens || again.selected_tokens != row.selected_tokens)
    out.fail("not deterministic: " + out.detail);
  return out;
}

Outcome fuzz_safety() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  sw::Engine base;
  base.dispatch({sw::TaskType::Create, nlohmann::json::parse(R"([{"name": "base", "primitive": "cube"}])"), ""});
  const std::string base_snapshot = base.snapshot().serialize();

  const std::vector<std::pair<sw::TaskType, std::string>> seeds = {
      {sw::TaskType::Create, R"(Here. {"objects": [{"name": "cube", "primitive": "cube", "position": [0, 1, 0], "color": "red"}]})"},
      {sw::TaskType::Create, R"({"objects": [{"name": "desk", "prefab": "table", "parent": "base", "frame": "local"}]})"},
      {sw::TaskType::Animate, R"({"animations": [{"id": "a", "unit": "translate", "subject": "base", "target": [1, 1, 1], "speed": 2}]})"},
      {sw::TaskType::Animate, R"({"animations": [{"id": "o", "unit": "orbit", "subject": "base", "target": {"nearest_to": [0, 0, 0]}, "axis": "y"}]})"},
      {sw::TaskType::Fuse, R"({"actions": [{"object": "base", "block": "grabbable"}]})"},
      {sw::TaskType::Converse, R"(Hello there.)"},
  };
  Gen gen(20240601);
  int rejected = 0;
  int accepted = 0;
  for (int i = 0; i < kFuzzCases && out.pass; ++i) {
    const auto& [type, seed] = seeds[gen.index(seeds.size())];
    std::string text = seed;
    if (gen.coin(0.05)) {
      text = gen.bytes(200);
    } else {
      for (int m = gen.integer(1, 4); m > 0 && !text.empty(); --m) {
        const std::size_t at = gen.index(text.size());
        switch (gen.integer(0, 3)) {
          case 0: text[at] = static_cast<char>(gen.integer(0, 255)); break;
          case 1: text.erase(at, gen.index(text.size() - at) + 1); break;
          case 2: text.insert(at, text.substr(gen.index(text.size()), gen.integer(1, 12))); break;
          default: text.insert(at, 1, "{}[]\",:-0e9"[gen.index(11)]); break;
        }
      }
    }
    sw::Engine trial = base;
    try {
      const auto command = sw::llm::parse_refined_response(text, type);
      trial.dispatch(command);
      ++accepted;
      continue;
    } catch (const sw::Error&) {
      ++rejected;
    } catch (const std::exception& e) {
      out.fail(format("case %d: untyped exception %s", i, e.what()));
      break;
    }
    if (trial.snapshot().serialize() != base_snapshot || !trial.animations().active_ids().empty())
      out.fail(format("case %d: rejected output mutated the scene", i));
  }
  const double elapsed = seconds_since(t0);
  if (out.pass) out.detail = format("cases=%d rejected=%d accepted=%d s=%.2f", kFuzzCases, rejected, accepted, elapsed);
  if (elapsed > kMaxFuzzSeconds) out.fail("too slow: " + out.detail);
  return out;
}

Outcome task_replay() {
  Outcome out;
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<std::string> tasks = {"task1_car", "task2_supplies", "task3_cube", "task4_solar", "task5_catch", "task6_gaze"};
  for (const auto& task : tasks) {
    const auto dir = sw::testing::fixture_dir() / "tasks" / task;
    try {
      sw::gateway::replay(dir / "transcript.json", dir / "script.json");
    } catch (const sw::Error& e) {
      out.fail(task + ": " + e.what());
    }
  }
  const double elapsed = seconds_since(t0);
  if (out.pass) out.detail = format("tasks=%zu s=%.2f", tasks.size(), elapsed);
  if (elapsed > kMaxReplaySeconds) out.fail("too slow: " + out.detail);
  return out;
}

struct Rig {
  sw::Scene scene;
  sw::AnimationLibrary lib{kDt};
  std::vector<sw::AnimationEvent> log;

  sw::ObjectId add(const std::string& name, sw::Vec3 pos) { return scene.add_object(sw::testing::cube_spec(name, pos)); }
  void schedule(const nlohmann::json& command) { lib.schedule(sw::parse_animation_request(command)); }
  void tick() {
    auto evs = lib.tick(scene);
    log.insert(log.end(), evs.begin(), evs.end());
  }
  std::optional<std::uint64_t> tick_of(const std::string& id, const std::string& kind) const {
    for (const auto& e : log)
      if (e.id == id && e.kind == kind) return e.tick;
    return std::nullopt;
  }
  sw::Vec3 pos(const std::string& name) const { return scene.world_pose(*scene.find_by_name(name)).position; }
};

nlohmann::json vec_json(const sw::Vec3& v) { return {v.x(), v.y(), v.z()}; }

std::uint64_t steps_for(double seconds) { return static_cast<std::uint64_t>(std::ceil(seconds / kDt - 1e-9)); }

Outcome kinematics() {
  Outcome out;
  Gen gen(7001);
  double worst_orbit = 0.0;

  {
    Rig rig;
    rig.add("cube", sw::Vec3::Zero());
    rig.schedule(nlohmann::json::parse(R"([{"id": "m", "unit": "translate", "subject": "cube", "target": [2, 0, 0], "speed": 1}])"));
    for (int i = 0; i < 120; ++i) rig.tick();
    if (rig.tick_of("m", "completed") != 100u) out.fail("2 m at 1 m/s did not complete at tick 100");
    if (rig.pos("cube") != sw::Vec3(2, 0, 0)) out.fail("2 m move did not land exactly on the target");
  }

  for (int c = 0; c < kKinematicCases && out.pass; ++c) {
    Rig rig;
    const sw::Vec3 start = gen.vec(-5, 5);
    const sw::Vec3 target = gen.vec(-5, 5);
    const double speed = gen.real(0.2, 4.0);
    rig.add("cube", start);
    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "m"}, {"unit", "translate"}, {"subject", "cube"}, {"target", vec_json(target)},
                                   {"speed", speed}}}}});
    const std::uint64_t n = steps_for((target - start).norm() / speed);
    for (std::uint64_t k = 0; k <= n + 1; ++k) rig.tick();
    if (rig.tick_of("m", "completed") != n) out.fail(format("translate case %d: wrong completion tick", c));
    if (rig.pos("cube") != target) out.fail(format("translate case %d: final position not exact", c));
  }

  for (int c = 0; c < kKinematicCases && out.pass; ++c) {
    Rig rig;
    const sw::Vec3 center = gen.vec(-3, 3);
    const sw::Vec3 start = center + gen.vec(-2, 2);
    rig.add("sun", center);
    rig.add("planet", start);
    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "o"}, {"unit", "orbit"}, {"subject", "planet"}, {"target", "sun"},
                                   {"axis", vec_json(gen.unit())}, {"speed", gen.real(5, 90)}}}}});
    const double radius = (start - center).norm();
    for (int k = 0; k < kOrbitTicks; ++k) {
      rig.tick();
      worst_orbit = std::max(worst_orbit, std::abs((rig.pos("planet") - center).norm() - radius));
    }
    if (worst_orbit > kKinematicTolerance) out.fail(format("orbit case %d: radius drift %.3g", c, worst_orbit));
  }

  for (int c = 0; c < kKinematicCases && out.pass; ++c) {
    Rig rig;
    const sw::ObjectId id = rig.add("cube", sw::Vec3::Zero());
    const sw::Vec3 target = gen.positive_vec(0.1, 3.0);
    const double duration = kDt * 2 * gen.integer(1, 75);
    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "s"}, {"unit", "scaling"}, {"subject", "cube"}, {"target", vec_json(target)},
                                   {"duration", duration}}}}});
    const std::uint64_t n = steps_for(duration);
    for (std::uint64_t k = 0; k < n / 2; ++k) rig.tick();
    const sw::Vec3 mid = (sw::Vec3::Ones() + target) / 2.0;
    if ((rig.scene.get(id).local.scale - mid).norm() > kKinematicTolerance)
      out.fail(format("scaling case %d: midpoint off", c));
  }

  for (int c = 0; c < kKinematicCases && out.pass; ++c) {
    Rig rig;
    rig.add("cube", sw::Vec3::Zero());
    nlohmann::json anims = nlohmann::json::array();
    const int n1 = gen.integer(1, 60);
    const int n2 = gen.integer(1, 60);
    anims.push_back({{"id", "s1"}, {"unit", "translate"}, {"subject", "cube"}, {"target", vec_json(gen.vec(-2, 2))},
                     {"duration", n1 * kDt}, {"sequence_group", "g"}});
    anims.push_back({{"id", "s2"}, {"unit", "translate"}, {"subject", "cube"}, {"target", vec_json(gen.vec(-2, 2))},
                     {"duration", n2 * kDt}, {"sequence_group", "g"}});
    rig.schedule(nlohmann::json{{"animations", anims}});
    for (int k = 0; k < n1 + n2 + 5; ++k) rig.tick();
    const auto done1 = rig.tick_of("s1", "completed");
    if (!done1 || rig.tick_of("s2", "started") != done1) out.fail(format("sequence case %d: s2 did not start at s1's completion", c));
  }

  if (out.pass)
    out.detail = format("cases=%d per property, orbit ticks=%d, worst orbit drift=%.3g", kKinematicCases, kOrbitTicks, worst_orbit);
  return out;
}

Outcome hierarchy_round_trip() {
  Outcome out;
  Gen gen(7002);
  double worst = 0.0;
  int run = 0;
  for (int c = 0; run < kHierarchyCases && out.pass; ++c) {
    Rig rig;
    std::vector<sw::ObjectId> ids;
    const int n = gen.integer(2, 9);
    for (int i = 0; i < n; ++i) {
      sw::ObjectSpec s = sw::testing::cube_spec("o" + std::to_string(i), gen.vec(-4, 4), gen.positive_vec(0.25, 3.0));
      s.local.orientation = gen.euler();
      if (!ids.empty() && gen.coin(0.6)) s.parent = ids[gen.index(ids.size())];
      ids.push_back(rig.scene.add_object(s));
    }
    const sw::ObjectId child = ids[gen.index(ids.size())];
    std::vector<sw::ObjectId> candidates;
    for (sw::ObjectId id : ids)
      if (!rig.scene.is_descendant(id, child) && rig.scene.get(child).parent != id) candidates.push_back(id);
    if (candidates.empty()) continue;
    const sw::ObjectId parent = candidates[gen.index(candidates.size())];
    const std::string child_name = rig.scene.get(child).name;
    const auto before_parent = rig.scene.get(child).parent;
    const sw::Vec3 before = rig.scene.world_pose(child).position;

    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "a"}, {"unit", "attach"}, {"subject", child_name}, {"target", rig.scene.get(parent).name}}}}});
    rig.tick();
    if (rig.scene.get(child).parent != parent) out.fail(format("case %d: attach did not reparent", c));
    worst = std::max(worst, (rig.scene.world_pose(child).position - before).norm());
    rig.schedule(nlohmann::json{{"animations", {{{"id", "d"}, {"unit", "detach"}, {"subject", child_name}}}}});
    rig.tick();
    if (rig.scene.get(child).parent != before_parent) out.fail(format("case %d: detach did not restore the parent", c));
    worst = std::max(worst, (rig.scene.world_pose(child).position - before).norm());
    if (worst > kHierarchyTolerance) out.fail(format("case %d: world position moved by %.3g", c, worst));
    ++run;
  }
  if (out.pass) out.detail = format("cases=%d worst=%.3g", run, worst);
  return out;
}

sw::SupportSurface surface(const std::string& label, sw::Vec3 center, double hx, double hz, double top, double yaw) {
  sw::SupportSurface s;
  s.label = label;
  s.center = center;
  s.half_x = hx;
  s.half_z = hz;
  s.top = top;
  s.yaw_deg = yaw;
  return s;
}

Outcome support_enforcement() {
  Outcome out;
  Gen gen(7003);
  double worst = 0.0;
  for (int c = 0; c < kSupportCases && out.pass; ++c) {
    sw::Scene scene;
    const double top = gen.real(0.4, 1.2);
    const sw::Vec3 center(gen.real(-2, 2), top / 2, gen.real(-2, 2));
    std::vector<sw::SupportSurface> supports = {
        surface("table", center, gen.real(0.3, 1.5), gen.real(0.3, 1.5), top, gen.coin() ? 0.0 : gen.real(-180, 180))};
    std::vector<sw::ObjectId> cups;
    std::vector<std::pair<sw::ObjectId, sw::Vec3>> placeholders;
    for (int i = gen.integer(1, 4); i > 0; --i) {
      const sw::Vec3 pos = center + sw::Vec3(gen.real(-2.5, 2.5), top + gen.real(0.05, 2.0), gen.real(-2.5, 2.5));
      sw::ObjectSpec s = sw::testing::cube_spec("cup" + std::to_string(i), pos, gen.positive_vec(0.05, 0.3));
      s.geometry = sw::Geometry::primitive(gen.coin() ? sw::GeometryKind::Cylinder : sw::GeometryKind::Cube);
      s.physics = true;
      cups.push_back(scene.add_object(s));
      sw::ObjectSpec p;
      p.name = "anchor" + std::to_string(i);
      p.local.position = pos;
      p.physics = true;
      placeholders.emplace_back(scene.add_object(p), pos);
    }
    std::vector<sw::ObjectId> all = cups;
    for (const auto& [id, _] : placeholders) all.push_back(id);
    sw::enforce_support(all, scene, supports);
    for (sw::ObjectId id : cups) {
      const sw::WorldBox box = *scene.world_box(id);
      const double gap = std::abs(box.bottom() - supports[0].top);
      worst = std::max(worst, gap);
      if (gap > kSupportTolerance || !supports[0].contains(box.center))
        out.fail(format("case %d: %s not resting on the table", c, scene.get(id).name.c_str()));
    }
    for (const auto& [id, pos] : placeholders)
      if (scene.world_pose(id).position != pos) out.fail(format("case %d: placeholder moved", c));
  }
  if (out.pass) out.detail = format("cases=%d worst gap=%.3g", kSupportCases, worst);
  return out;
}

class QueueProvider : public sw::llm::LLMProvider {
 public:
  std::deque<sw::llm::Completion> replies;
  std::vector<sw::llm::PromptEnvelope> seen;

  sw::llm::Completion complete(const sw::llm::PromptEnvelope& envelope) override {
    seen.push_back(envelope);
    if (replies.empty()) return {R"({"subtasks": [{"task_type": "converse", "request": "chat", "categories": []}]})", 1, 1};
    auto c = replies.front();
    replies.pop_front();
    return c;
  }
};

Outcome history_window() {
  Outcome out;
  sw::Engine engine;
  sw::llm::LocalEngineAccess access(engine);
  sw::llm::UsageLedger ledger;
  QueueProvider provider;
  sw::llm::Wrapper wrapper(provider, ledger);
  sw::HistoryQueue history;
  const std::string plan = R"({"subtasks": [{"task_type": "converse", "request": "chat", "categories": [{"kind": "history"}]}]})";
  std::vector<std::string> expected;
  for (int m = kHistoryRequests - static_cast<int>(kHistoryWindow) + 1; m <= kHistoryRequests; ++m)
    expected.push_back("message " + std::to_string(m));
  std::size_t checked = 0;
  for (int i = 1; i <= kHistoryRequests; ++i) {
    const std::size_t before = provider.seen.size();
    provider.replies = {{plan, 1, 1}, {"Sure.", 1, 1}};
    wrapper.handle_request("message " + std::to_string(i), history, access, "r" + std::to_string(i));
    if (i < kHistoryRequests) continue;
    for (std::size_t k = before; k < provider.seen.size(); ++k) {
      const auto& env = provider.seen[k];
      if (env.stage == sw::llm::PromptStage::Initial && env.history != expected)
        out.fail("initial prompt history is not the last 10 messages");
      for (std::size_t m = 0; m < expected.size(); ++m)
        if (env.user_message.find(std::to_string(m + 1) + ". " + expected[m] + "\n") == std::string::npos)
          out.fail(std::string(sw::llm::to_string(env.stage)) + " prompt lacks " + expected[m]);
      if (env.user_message.find("message 15\n") != std::string::npos) out.fail("prompt still mentions message 15");
      ++checked;
    }
  }
  if (checked != 2) out.fail("expected one initial and one refined prompt");
  if (out.pass) out.detail = format("requests=%d window=%zu prompts_checked=%zu", kHistoryRequests, kHistoryWindow, checked);
  return out;
}

Outcome token_ledger() {
  Outcome out;
  sw::Engine engine;
  sw::llm::LocalEngineAccess access(engine);
  sw::llm::UsageLedger ledger;
  QueueProvider provider;
  provider.replies = {
      {R"({"subtasks": [{"task_type": "create", "request": "make a cube", "categories": []}]})", 3000, 60},
      {R"(Done. {"objects": [{"name": "cube", "primitive": "cube"}]})", 200, 20},
  };
  sw::llm::Wrapper wrapper(provider, ledger);
  sw::HistoryQueue history;
  const auto result = wrapper.handle_request("make a cube", history, access, "r1");
  out.detail = format("input=%lld output=%lld calls=%zu wall_ms=%.3f", static_cast<long long>(result.usage.input_tokens),
                      static_cast<long long>(result.usage.output_tokens), result.usage.calls, result.wall_seconds * 1e3);
  if (result.usage.input_tokens != 3200 || result.usage.output_tokens != 80 || result.usage.calls != 2)
    out.fail("wrong totals: " + out.detail);
  if (ledger.size() != 1) out.fail("ledger did not record the request");
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"context_reduction", context_reduction},   {"zero_mutation_fuzz", fuzz_safety},
      {"task_replay", task_replay},               {"animation_kinematics", kinematics},
      {"hierarchy_round_trip", hierarchy_round_trip}, {"support_enforcement", support_enforcement},
      {"history_window", history_window},         {"token_ledger", token_ledger},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
