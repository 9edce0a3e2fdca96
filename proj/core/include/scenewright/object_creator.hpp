#pragma once

#include "scenewright/prefab_registry.hpp"
#include "scenewright/reality_fusion.hpp"
#include "scenewright/scene.hpp"

#include <optional>
#include <string>
#include <vector>

namespace scenewright {

/// One object to create, after defaults that do not depend on live scene
/// state have been applied. Exactly one of `prefab` / `primitive` is set.
struct CreationSpec {
  std::string name;
  std::optional<std::string> prefab;
  std::optional<GeometryKind> primitive;
  std::optional<Vec3> position;
  std::optional<Euler> orientation;
  std::optional<Vec3> scale;
  std::optional<Color> color;
  std::optional<std::string> parent;
  bool physics = false;
  bool grabbable = false;
  Frame frame = Frame::World;
  std::set<std::string> tags;
};

/// Creation-command schema (also embedded in refined prompts).
const nlohmann::json& creation_schema();

/// Turns a schema-valid creation command ({"objects": [...]} or the bare
/// array) into specs, preserving listed order.
std::vector<CreationSpec> interpret_creation(const nlohmann::json& command, const PrefabRegistry& registry);

struct CreationResult {
  std::vector<ObjectId> roots;  // one per spec, in spec order
  std::vector<ObjectId> all;    // roots plus expanded prefab parts
};

/// Inserts the specs into the scene all-or-nothing: if any spec fails the
/// scene is left exactly as it was and the error propagates.
CreationResult apply_creation(const std::vector<CreationSpec>& specs, Scene& scene, const PrefabRegistry& registry,
                              const HeadPose& head);

/// A horizontal surface something can rest on: the top face of a room proxy
/// or of a virtual object tagged "surface". The footprint is a rectangle of
/// half sizes (half_x, half_z) around `center`, rotated by `yaw_deg`.
struct SupportSurface {
  std::string label;
  std::optional<ObjectId> object;
  double top = 0.0;
  Vec3 center = Vec3::Zero();
  double half_x = 0.0;
  double half_z = 0.0;
  double yaw_deg = 0.0;

  /// Center expressed in footprint coordinates (x along the rotated X axis).
  [[nodiscard]] Eigen::Vector2d to_footprint(const Vec3& world) const;
  [[nodiscard]] Vec3 from_footprint(const Eigen::Vector2d& uv, double y) const;
  [[nodiscard]] bool contains(const Vec3& world) const;
};

std::vector<SupportSurface> supports_from_proxies(const std::vector<RoomProxy>& proxies);
std::vector<SupportSurface> supports_from_scene(const Scene& scene);

enum class AdjustmentKind { Snapped, Clamped, Ground };
std::string_view to_string(AdjustmentKind kind) noexcept;

struct SupportAdjustment {
  ObjectId object;
  std::string name;
  AdjustmentKind kind = AdjustmentKind::Snapped;
  Vec3 from = Vec3::Zero();
  Vec3 to = Vec3::Zero();
  std::string support;  // label of the chosen surface, "ground" for y = 0
};

/// Maximum drop distance when searching for a support below an object.
inline constexpr double kSupportSearchDepth = 10.0;

/// Settles physics-enabled, non-placeholder objects onto the surface below
/// them; objects whose center lies outside every footprint are first moved
/// horizontally inside the nearest one. Objects already resting are left
/// untouched and not reported.
std::vector<SupportAdjustment> enforce_support(const std::vector<ObjectId>& created, Scene& scene,
                                               const std::vector<SupportSurface>& supports);

}  // namespace scenewright
