#pragma once

#include "scenewright/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace scenewright {

struct ObjectState {
  SceneObject object;
  Vec3 world_position = Vec3::Zero();
  Euler world_orientation;
  Vec3 world_scale = Vec3::Ones();
};

struct AnimationStatus {
  std::string id;
  std::string unit;
  std::string subject;
  double progress = 0.0;  // in [0,1]; 0 for open-ended animations
};

/// Immutable view of the scene at one tick; safe to share across threads.
struct SceneSnapshot {
  std::uint64_t tick = 0;
  std::vector<ObjectState> objects;
  std::vector<AnimationStatus> active_animations;

  [[nodiscard]] nlohmann::json to_json() const;
  /// Canonical text (sorted keys, six-decimal floats).
  [[nodiscard]] std::string serialize() const;
  [[nodiscard]] const ObjectState* find(std::string_view name) const;
};

SceneSnapshot capture(const Scene& scene, std::uint64_t tick, std::vector<AnimationStatus> animations);

nlohmann::json to_json(const SceneObject& obj);

}  // namespace scenewright
