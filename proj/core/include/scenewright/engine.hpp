#pragma once

#include "scenewright/animation.hpp"
#include "scenewright/command.hpp"
#include "scenewright/context_library.hpp"
#include "scenewright/object_creator.hpp"
#include "scenewright/prefab_registry.hpp"
#include "scenewright/reality_fusion.hpp"
#include "scenewright/scene.hpp"
#include "scenewright/snapshot.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scenewright {

struct Warning {
  std::uint64_t tick = 0;
  std::string message;
};

/// What a single dispatched command did to the engine.
struct DispatchOutcome {
  TaskType task_type = TaskType::Converse;
  std::vector<std::string> created;         // root object names
  std::vector<std::string> scheduled;       // animation ids
  std::vector<SupportAdjustment> adjustments;
  std::vector<std::string> fused;           // object names that received a block

  [[nodiscard]] nlohmann::json to_json() const;
};

struct TickResult {
  std::uint64_t tick = 0;
  std::vector<AnimationEvent> events;
  std::vector<SupportAdjustment> adjustments;
};

struct EngineOptions {
  double timestep = kDefaultTimestep;
};

/// Owns the scene and every interpreter acting on it. All mutation goes
/// through this class, and in a server all calls come from one thread.
class Engine {
 public:
  Engine();
  explicit Engine(PrefabRegistry prefabs, EngineOptions options = {});
  Engine(const Engine& other);
  Engine& operator=(const Engine& other);
  ~Engine() = default;

  std::vector<RoomProxy> load_room_scan(const nlohmann::json& document);

  /// Applies one command all-or-nothing; errors propagate with the engine
  /// unchanged.
  DispatchOutcome dispatch(const CommandEnvelope& command);

  /// Copy of the engine with `pending` applied in order; commands that fail
  /// are skipped. Used to build context for later subtasks of a request
  /// without committing earlier ones.
  [[nodiscard]] Engine preview(const std::vector<CommandEnvelope>& pending) const;

  [[nodiscard]] ContextPayload retrieve(const std::vector<ContextCategory>& request,
                                        const HistoryQueue* history) const;

  /// animations, hand anchors and follow constraints, support for objects
  /// that came to rest, gaze re-aim.
  TickResult tick();

  /// False (with a warning) when the pose is older than the last one.
  bool update_hand_pose(const HandPose& pose);
  void set_head_pose(const HeadPose& head) { fusion_.set_head_pose(head); }
  void pick(const ObjectRef& object, Hand hand);
  std::optional<ObjectId> release(Hand hand);
  std::vector<AnimationEvent> stop_animation(const std::string& id);

  [[nodiscard]] SceneSnapshot snapshot() const;
  [[nodiscard]] std::uint64_t current_tick() const noexcept { return animations_.current_tick(); }
  [[nodiscard]] double timestep() const noexcept { return animations_.timestep(); }
  [[nodiscard]] const Scene& scene() const noexcept { return scene_; }
  [[nodiscard]] const ContextLibrary& context() const noexcept { return context_; }
  [[nodiscard]] const AnimationLibrary& animations() const noexcept { return animations_; }
  [[nodiscard]] const RealityFusion& fusion() const noexcept { return fusion_; }
  [[nodiscard]] const PrefabRegistry& prefabs() const noexcept { return prefabs_; }

  void warn(const std::string& message);
  std::vector<Warning> take_warnings();

 private:
  void wire();
  std::vector<SupportSurface> supports() const;
  std::vector<SupportAdjustment> settle(const std::vector<ObjectId>& objects);

  PrefabRegistry prefabs_;
  Scene scene_;
  ContextLibrary context_;
  AnimationLibrary animations_;
  RealityFusion fusion_;
  std::vector<ObjectId> pending_settle_;
  std::vector<Warning> warnings_;
};

}  // namespace scenewright
