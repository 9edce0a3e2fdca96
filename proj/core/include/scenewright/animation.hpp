#pragma once

#include "scenewright/context_library.hpp"
#include "scenewright/scene.hpp"
#include "scenewright/snapshot.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scenewright {

enum class AnimationUnit { Translate, Rotate, Gaze, Orbit, Scaling, Coloring, Attach, Detach, Catch, Stop, Destroy };

std::string_view to_string(AnimationUnit unit) noexcept;
/// Case-insensitive.
std::optional<AnimationUnit> animation_unit_from_string(std::string_view name) noexcept;
/// Attach, Detach, Stop and Destroy take effect within a single tick.
bool is_instantaneous(AnimationUnit unit) noexcept;

inline constexpr double kDefaultTimestep = 0.02;
inline constexpr double kDefaultTranslateSpeed = 1.0;  // m/s
inline constexpr double kDefaultAngularSpeed = 45.0;   // deg/s
inline constexpr double kDefaultBlendDuration = 1.0;   // s, Scaling and Coloring
inline constexpr double kCatchStandoff = 0.3;          // m
inline constexpr double kCatchFaceDuration = 0.5;      // s

/// One animation after parsing. Which optional fields are meaningful depends
/// on the unit; parse_animation_request enforces the per-unit requirements.
struct AnimationSpec {
  std::string id;
  AnimationUnit unit = AnimationUnit::Translate;
  std::optional<ObjectRef> subject;

  std::optional<Vec3> point;            // Translate destination, Catch destination
  std::optional<ObjectRef> target;      // Translate/Rotate/Gaze/Orbit/Attach object, Catch item
  std::optional<Euler> euler;           // Rotate absolute orientation
  std::optional<Vec3> axis;             // Rotate/Orbit axis
  std::optional<double> degrees;        // Rotate/Orbit sweep
  std::optional<Vec3> scale;            // Scaling target
  std::optional<Color> color;           // Coloring target
  std::string stop_id;                  // Stop
  std::optional<ObjectRef> destination_object;  // Catch destination given as an object

  std::optional<double> speed;
  std::optional<double> duration;
  Frame frame = Frame::World;
  std::string sequence_group;  // empty: runs in a group of its own
  double standoff = 0.0;       // Translate toward an object stops this far short
  std::optional<ObjectRef> carry;  // Translate moves the subject so this object lands on the target
};

nlohmann::json to_json(const AnimationSpec& spec);

/// Animation-command schema ({"animations": [...]}).
const nlohmann::json& animation_schema();

/// Turns a schema-valid command ({"animations": [...]} or the bare array)
/// into specs in listed order, with Catch already expanded. Throws
/// UnknownUnit and MissingTarget.
std::vector<AnimationSpec> parse_animation_request(const nlohmann::json& command);

/// Approach, face, attach, carry, release: five specs sharing one sequence
/// group ("catch:<id>" unless the Catch names its own group).
std::vector<AnimationSpec> expand_catch(const AnimationSpec& spec);

struct AnimationEvent {
  std::uint64_t tick = 0;
  std::string id;
  std::string unit;
  std::string kind;  // started | progressed | completed | skipped | stopped
  std::string subject;

  [[nodiscard]] nlohmann::json to_json() const;
  friend bool operator==(const AnimationEvent&, const AnimationEvent&) = default;
};

/// The action queue plus the running instances. Not thread-safe: every call
/// happens on the engine loop.
class AnimationLibrary {
 public:
  using WarningSink = std::function<void(const std::string&)>;

  explicit AnimationLibrary(double timestep = kDefaultTimestep, ContextLibrary* registry = nullptr);

  void set_warning_sink(WarningSink sink) { warn_ = std::move(sink); }
  /// Index that mirrors every scheduled id and its state; may be null.
  void set_registry(ContextLibrary* registry) noexcept { registry_ = registry; }
  [[nodiscard]] double timestep() const noexcept { return dt_; }
  [[nodiscard]] std::uint64_t current_tick() const noexcept { return tick_; }

  /// Enqueues all specs or none. Throws DuplicateActiveId if an id is already
  /// queued or running (or repeated within the batch).
  std::vector<std::string> schedule(const std::vector<AnimationSpec>& specs);

  /// Advances the tick counter and every running instance by one timestep.
  std::vector<AnimationEvent> tick(Scene& scene);

  /// Removes a queued or running animation, leaving its subject where it is.
  /// A Catch id also stops its sub-steps. Completed ids are a warning-only
  /// no-op; ids never scheduled throw NotFound.
  std::vector<AnimationEvent> stop(const std::string& id);

  /// Drops every running instance that references `object`.
  std::vector<AnimationEvent> forget_object(ObjectId object);

  /// Points every running Gaze subject at its target again; used after other
  /// constraints have moved things.
  void reaim_gazes(Scene& scene) const;

  [[nodiscard]] std::vector<AnimationStatus> active(const Scene& scene) const;
  [[nodiscard]] std::vector<std::string> active_ids() const;
  [[nodiscard]] bool is_active(const std::string& id) const;
  [[nodiscard]] bool is_queued(const std::string& id) const;
  [[nodiscard]] bool idle() const noexcept;
  /// True while a running instance moves or reparents `object`.
  [[nodiscard]] bool animating(ObjectId object) const;
  /// Objects whose animation finished (or stopped) since the last call.
  std::vector<ObjectId> take_settled_subjects();

 private:
  struct Instance {
    AnimationSpec spec;
    std::string group;
    ObjectId subject;
    std::uint64_t started = 0;
    std::uint64_t steps = 0;
    std::optional<std::uint64_t> total;  // nullopt: runs until stopped
    // Captured at activation.
    Vec3 start_position = Vec3::Zero();
    Vec3 end_position = Vec3::Zero();
    Quat start_rotation = Quat::Identity();
    Quat end_rotation = Quat::Identity();
    Vec3 axis = Vec3::UnitY();
    double sweep = 0.0;          // degrees; signed
    double angular_speed = 0.0;  // degrees per second, continuous units
    Vec3 start_scale = Vec3::Ones();
    Vec3 end_scale = Vec3::Ones();
    Color start_color;
    Color end_color;
    std::optional<ObjectId> other;  // Gaze/Orbit target, Attach parent
    Vec3 orbit_offset = Vec3::Zero();
    bool removed = false;
  };

  enum class StepResult { Running, Completed, Skipped };

  void activate_ready(Scene& scene, std::vector<AnimationEvent>& events);
  void activate_group(const std::string& group, Scene& scene, std::vector<AnimationEvent>& events);
  /// Binds the spec to live objects; false (with a warning) if it cannot be.
  bool bind(Instance& inst, Scene& scene);
  StepResult step(Instance& inst, Scene& scene, std::vector<AnimationEvent>& events);
  void finish(Instance& inst, AnimationState state);
  AnimationEvent event(const AnimationSpec& spec, std::string_view kind, const std::string& subject) const;
  std::string subject_label(const AnimationSpec& spec) const;
  void mark(const std::string& id, AnimationState state);
  void warn(const std::string& message) const {
    if (warn_) warn_(message);
  }

  double dt_;
  ContextLibrary* registry_;
  std::uint64_t tick_ = 0;
  std::map<std::string, std::deque<AnimationSpec>> queues_;
  std::vector<std::string> group_order_;  // first-seen order of groups
  std::vector<Instance> running_;         // activation order
  std::map<std::string, AnimationState> states_;
  std::map<ObjectId, std::optional<ObjectId>> attach_records_;
  std::vector<ObjectId> settled_;
  std::vector<std::string> pending_stops_;
  WarningSink warn_;
};

}  // namespace scenewright
