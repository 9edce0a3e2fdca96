#pragma once

#include "scenewright/math.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace scenewright {

struct ObjectId {
  std::uint64_t value = 0;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

enum class GeometryKind { Cube, Sphere, Cylinder, Capsule, Plane, Prefab };

/// Coordinate frame a command's vectors are expressed in.
enum class Frame { World, Local };
std::optional<Frame> frame_from_string(std::string_view name) noexcept;

std::string_view to_string(GeometryKind kind) noexcept;
std::optional<GeometryKind> geometry_kind_from_string(std::string_view name) noexcept;

/// Shape of a node at unit scale. `dimensions` are full extents of the local
/// bounding box and `bounds_center` its offset from the node origin (non-zero
/// only for prefab composites whose parts are not centered on the root).
struct Geometry {
  GeometryKind kind = GeometryKind::Cube;
  Vec3 dimensions = Vec3::Ones();
  Vec3 bounds_center = Vec3::Zero();
  std::string prefab;

  static Geometry primitive(GeometryKind kind);
};

struct Transform {
  Vec3 position = Vec3::Zero();
  Euler orientation;
  Vec3 scale = Vec3::Ones();
};

/// Everything needed to create a node; the scene assigns the id.
struct ObjectSpec {
  std::string name;
  Transform local;
  std::optional<ObjectId> parent;
  Color color = Color::light_gray();
  std::optional<Geometry> geometry;
  bool physics = false;
  bool grabbable = false;
  bool visible = true;
  std::set<std::string> tags;
};

struct SceneObject {
  ObjectId id;
  std::string name;
  Transform local;
  std::optional<ObjectId> parent;
  Color color = Color::light_gray();
  std::optional<Geometry> geometry;
  bool physics = false;
  bool grabbable = false;
  bool visible = true;
  std::set<std::string> tags;

  [[nodiscard]] bool is_placeholder() const noexcept { return !geometry.has_value(); }
};

/// Resolved world pose. `affine` + `position` are the exact composed map
/// (including any shear from non-uniform scale under rotation); `rotation`
/// and `scale` are the per-level products used for orientation and sizing.
struct WorldPose {
  Vec3 position = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 scale = Vec3::Ones();
  Mat3 affine = Mat3::Identity();

  [[nodiscard]] Vec3 apply(const Vec3& local_point) const { return affine * local_point + position; }
};

struct ByName {
  std::string name;
};
struct ByTag {
  std::string tag;
};
struct NearestTo {
  Vec3 point = Vec3::Zero();
  std::optional<GeometryKind> kind;
};
using ObjectRef = std::variant<ByName, ByTag, NearestTo>;

/// Parses a reference: a bare string is a name; objects carry exactly one of
/// "name", "tag" or "nearest_to" (+ optional "kind"). nullopt if malformed.
std::optional<ObjectRef> parse_object_ref(const nlohmann::json& value);
nlohmann::json to_json(const ObjectRef& ref);
std::string describe(const ObjectRef& ref);

/// Axis-aligned box of a node in world space, ignoring rotation.
struct WorldBox {
  Vec3 center = Vec3::Zero();
  Vec3 half = Vec3::Zero();
  [[nodiscard]] double bottom() const { return center.y() - half.y(); }
  [[nodiscard]] double top() const { return center.y() + half.y(); }
};

/// The scene graph: a forest of named nodes with local transforms. Ids are
/// handed out in increasing order, so id order is creation order. The class
/// is a plain value; copying it yields an independent scene.
class Scene {
 public:
  ObjectId add_object(const ObjectSpec& spec);
  void set_parent(ObjectId child, std::optional<ObjectId> parent, bool preserve_world);
  void destroy_object(ObjectId id);

  [[nodiscard]] Vec3 local_to_world(ObjectId id, const Vec3& point) const;
  [[nodiscard]] Vec3 world_to_local(ObjectId id, const Vec3& point) const;
  [[nodiscard]] WorldPose world_pose(ObjectId id) const;
  [[nodiscard]] WorldPose parent_pose(ObjectId id) const;
  [[nodiscard]] std::optional<WorldBox> world_box(ObjectId id) const;

  [[nodiscard]] ObjectId resolve(const ObjectRef& ref) const;

  [[nodiscard]] bool contains(ObjectId id) const { return objects_.contains(id); }
  [[nodiscard]] const SceneObject& get(ObjectId id) const;
  [[nodiscard]] std::optional<ObjectId> find_by_name(std::string_view name) const;
  [[nodiscard]] const std::map<ObjectId, SceneObject>& objects() const noexcept { return objects_; }
  [[nodiscard]] std::size_t size() const noexcept { return objects_.size(); }
  [[nodiscard]] std::vector<ObjectId> children_of(ObjectId id) const;
  /// True if `ancestor` lies on the parent chain of `id` (or equals it).
  [[nodiscard]] bool is_descendant(ObjectId id, ObjectId ancestor) const;

  /// `base` if free, otherwise the first free "base-2", "base-3", ...
  [[nodiscard]] std::string unique_name(const std::string& base) const;

  void set_local_transform(ObjectId id, const Transform& local);
  void set_world_position(ObjectId id, const Vec3& world);
  void set_world_rotation(ObjectId id, const Quat& world);
  void set_color(ObjectId id, const Color& color);
  void set_grabbable(ObjectId id, bool grabbable);
  void set_physics(ObjectId id, bool physics);
  void add_tag(ObjectId id, const std::string& tag);

 private:
  SceneObject& mutable_get(ObjectId id);
  static void validate(const Transform& t);

  std::map<ObjectId, SceneObject> objects_;
  std::unordered_map<std::string, ObjectId> by_name_;
  std::uint64_t next_id_ = 1;
};

}  // namespace scenewright
