#include "scenewright/scene.hpp"

#include "scenewright/error.hpp"

#include <cmath>
#include <limits>

namespace scenewright {

std::string_view to_string(GeometryKind kind) noexcept {
  switch (kind) {
    case GeometryKind::Cube: return "cube";
    case GeometryKind::Sphere: return "sphere";
    case GeometryKind::Cylinder: return "cylinder";
    case GeometryKind::Capsule: return "capsule";
    case GeometryKind::Plane: return "plane";
    case GeometryKind::Prefab: return "prefab";
  }
  return "cube";
}

std::optional<GeometryKind> geometry_kind_from_string(std::string_view name) noexcept {
  if (name == "cube") return GeometryKind::Cube;
  if (name == "sphere") return GeometryKind::Sphere;
  if (name == "cylinder") return GeometryKind::Cylinder;
  if (name == "capsule") return GeometryKind::Capsule;
  if (name == "plane") return GeometryKind::Plane;
  if (name == "prefab") return GeometryKind::Prefab;
  return std::nullopt;
}

std::optional<Frame> frame_from_string(std::string_view name) noexcept {
  if (name == "world") return Frame::World;
  if (name == "local") return Frame::Local;
  return std::nullopt;
}

Geometry Geometry::primitive(GeometryKind kind) {
  Geometry g;
  g.kind = kind;
  switch (kind) {
    case GeometryKind::Cylinder:
    case GeometryKind::Capsule: g.dimensions = Vec3(1.0, 2.0, 1.0); break;
    case GeometryKind::Plane: g.dimensions = Vec3(1.0, 0.0, 1.0); break;
    default: g.dimensions = Vec3::Ones(); break;
  }
  return g;
}

std::optional<ObjectRef> parse_object_ref(const nlohmann::json& value) {
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    if (s.empty()) return std::nullopt;
    return ByName{s};
  }
  if (!value.is_object()) return std::nullopt;
  const int forms = static_cast<int>(value.contains("name")) + static_cast<int>(value.contains("tag")) +
                    static_cast<int>(value.contains("nearest_to"));
  if (forms != 1) return std::nullopt;
  if (auto it = value.find("name"); it != value.end()) {
    if (!it->is_string() || it->get_ref<const std::string&>().empty()) return std::nullopt;
    return ByName{it->get<std::string>()};
  }
  if (auto it = value.find("tag"); it != value.end()) {
    if (!it->is_string() || it->get_ref<const std::string&>().empty()) return std::nullopt;
    return ByTag{it->get<std::string>()};
  }
  auto point = parse_vec3(value.at("nearest_to"));
  if (!point) return std::nullopt;
  NearestTo q{*point, std::nullopt};
  if (auto it = value.find("kind"); it != value.end()) {
    if (!it->is_string()) return std::nullopt;
    q.kind = geometry_kind_from_string(it->get_ref<const std::string&>());
    if (!q.kind) return std::nullopt;
  }
  return q;
}

nlohmann::json to_json(const ObjectRef& ref) {
  return std::visit(
      [](const auto& r) -> nlohmann::json {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ByName>) {
          return r.name;
        } else if constexpr (std::is_same_v<T, ByTag>) {
          return {{"tag", r.tag}};
        } else {
          nlohmann::json j = {{"nearest_to", to_json(r.point)}};
          if (r.kind) j["kind"] = std::string(to_string(*r.kind));
          return j;
        }
      },
      ref);
}

std::string describe(const ObjectRef& ref) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, ByName>) {
          return r.name;
        } else if constexpr (std::is_same_v<T, ByTag>) {
          return "tag:" + r.tag;
        } else {
          return "nearest:" + to_json(r.point).dump();
        }
      },
      ref);
}

void Scene::validate(const Transform& t) {
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(t.position[i])) throw Error(ErrorCode::InvalidTransform, "position must be finite");
    if (!(t.scale[i] > 0.0) || !std::isfinite(t.scale[i]))
      throw Error(ErrorCode::InvalidTransform, "scale components must be finite and > 0");
  }
  if (!std::isfinite(t.orientation.yaw) || !std::isfinite(t.orientation.pitch) ||
      !std::isfinite(t.orientation.roll))
    throw Error(ErrorCode::InvalidTransform, "orientation must be finite");
}

ObjectId Scene::add_object(const ObjectSpec& spec) {
  if (spec.name.empty()) throw Error(ErrorCode::DuplicateName, "object name must be non-empty");
  if (by_name_.contains(spec.name)) throw Error(ErrorCode::DuplicateName, spec.name);
  if (spec.parent && !contains(*spec.parent))
    throw Error(ErrorCode::UnknownParent, "parent id " + std::to_string(spec.parent->value));
  validate(spec.local);

  SceneObject obj;
  obj.id = ObjectId{next_id_++};
  obj.name = spec.name;
  obj.local = spec.local;
  obj.local.orientation = spec.local.orientation.normalized();
  obj.parent = spec.parent;
  obj.color = spec.color;
  obj.geometry = spec.geometry;
  obj.physics = spec.physics;
  obj.grabbable = spec.grabbable;
  obj.visible = spec.visible;
  obj.tags = spec.tags;
  by_name_.emplace(obj.name, obj.id);
  const ObjectId id = obj.id;
  objects_.emplace(id, std::move(obj));
  return id;
}

const SceneObject& Scene::get(ObjectId id) const {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw Error(ErrorCode::UnknownObject, "id " + std::to_string(id.value));
  return it->second;
}

SceneObject& Scene::mutable_get(ObjectId id) {
  auto it = objects_.find(id);
  if (it == objects_.end()) throw Error(ErrorCode::UnknownObject, "id " + std::to_string(id.value));
  return it->second;
}

std::optional<ObjectId> Scene::find_by_name(std::string_view name) const {
  if (auto it = by_name_.find(std::string(name)); it != by_name_.end()) return it->second;
  return std::nullopt;
}

std::vector<ObjectId> Scene::children_of(ObjectId id) const {
  std::vector<ObjectId> out;
  for (const auto& [oid, obj] : objects_)
    if (obj.parent == id) out.push_back(oid);
  return out;
}

bool Scene::is_descendant(ObjectId id, ObjectId ancestor) const {
  std::optional<ObjectId> cur = id;
  while (cur) {
    if (*cur == ancestor) return true;
    cur = get(*cur).parent;
  }
  return false;
}

std::string Scene::unique_name(const std::string& base) const {
  if (!by_name_.contains(base)) return base;
  for (int n = 2;; ++n) {
    std::string candidate = base + "-" + std::to_string(n);
    if (!by_name_.contains(candidate)) return candidate;
  }
}

WorldPose Scene::world_pose(ObjectId id) const {
  const SceneObject& obj = get(id);
  WorldPose parent = obj.parent ? world_pose(*obj.parent) : WorldPose{};
  const Quat local_rot = to_quat(obj.local.orientation);
  WorldPose out;
  out.position = parent.apply(obj.local.position);
  out.rotation = (parent.rotation * local_rot).normalized();
  out.scale = parent.scale.cwiseProduct(obj.local.scale);
  out.affine = parent.affine * local_rot.toRotationMatrix() * obj.local.scale.asDiagonal();
  return out;
}

WorldPose Scene::parent_pose(ObjectId id) const {
  const SceneObject& obj = get(id);
  return obj.parent ? world_pose(*obj.parent) : WorldPose{};
}

Vec3 Scene::local_to_world(ObjectId id, const Vec3& point) const { return world_pose(id).apply(point); }

Vec3 Scene::world_to_local(ObjectId id, const Vec3& point) const {
  const WorldPose pose = world_pose(id);
  return pose.affine.inverse() * (point - pose.position);
}

std::optional<WorldBox> Scene::world_box(ObjectId id) const {
  const SceneObject& obj = get(id);
  if (!obj.geometry) return std::nullopt;
  const WorldPose pose = world_pose(id);
  WorldBox box;
  box.half = (obj.geometry->dimensions * 0.5).cwiseProduct(pose.scale);
  box.center = pose.position + obj.geometry->bounds_center.cwiseProduct(pose.scale);
  return box;
}

void Scene::set_parent(ObjectId child, std::optional<ObjectId> parent, bool preserve_world) {
  SceneObject& obj = mutable_get(child);
  if (parent) {
    if (!contains(*parent)) throw Error(ErrorCode::UnknownObject, "parent id " + std::to_string(parent->value));
    if (is_descendant(*parent, child))
      throw Error(ErrorCode::CycleDetected, obj.name + " cannot be placed under " + get(*parent).name);
  }
  if (preserve_world) {
    const WorldPose world = world_pose(child);
    const WorldPose np = parent ? world_pose(*parent) : WorldPose{};
    Transform local;
    local.position = np.affine.inverse() * (world.position - np.position);
    local.orientation = to_euler(np.rotation.conjugate() * world.rotation);
    local.scale = world.scale.cwiseQuotient(np.scale);
    validate(local);
    obj.local = local;
  }
  obj.parent = parent;
}

void Scene::destroy_object(ObjectId id) {
  const SceneObject& obj = get(id);
  const std::optional<ObjectId> grandparent = obj.parent;
  for (ObjectId child : children_of(id)) set_parent(child, grandparent, true);
  by_name_.erase(obj.name);
  objects_.erase(id);
}

ObjectId Scene::resolve(const ObjectRef& ref) const {
  if (const auto* by_name = std::get_if<ByName>(&ref)) {
    if (auto id = find_by_name(by_name->name)) return *id;
    throw Error(ErrorCode::NotFound, "no object named '" + by_name->name + "'");
  }
  if (const auto* by_tag = std::get_if<ByTag>(&ref)) {
    std::optional<ObjectId> found;
    for (const auto& [id, obj] : objects_) {
      if (!obj.tags.contains(by_tag->tag)) continue;
      if (found) throw Error(ErrorCode::AmbiguousName, "several objects tagged '" + by_tag->tag + "'");
      found = id;
    }
    if (!found) throw Error(ErrorCode::NotFound, "no object tagged '" + by_tag->tag + "'");
    return *found;
  }
  const auto& nearest = std::get<NearestTo>(ref);
  std::optional<ObjectId> best;
  double best_d2 = std::numeric_limits<double>::infinity();
  // Strict '<' keeps the earliest-created candidate on ties since objects_
  // iterates in id order.
  for (const auto& [id, obj] : objects_) {
    if (!obj.visible) continue;
    if (nearest.kind && (!obj.geometry || obj.geometry->kind != *nearest.kind)) continue;
    const double d2 = (world_pose(id).position - nearest.point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = id;
    }
  }
  if (!best) throw Error(ErrorCode::NotFound, "no candidate for nearest query");
  return *best;
}

void Scene::set_local_transform(ObjectId id, const Transform& local) {
  validate(local);
  SceneObject& obj = mutable_get(id);
  obj.local = local;
  obj.local.orientation = local.orientation.normalized();
}

void Scene::set_world_position(ObjectId id, const Vec3& world) {
  const WorldPose parent = parent_pose(id);
  SceneObject& obj = mutable_get(id);
  obj.local.position = parent.affine.inverse() * (world - parent.position);
}

void Scene::set_world_rotation(ObjectId id, const Quat& world) {
  const WorldPose parent = parent_pose(id);
  SceneObject& obj = mutable_get(id);
  obj.local.orientation = to_euler(parent.rotation.conjugate() * world);
}

void Scene::set_color(ObjectId id, const Color& color) { mutable_get(id).color = color; }
void Scene::set_grabbable(ObjectId id, bool grabbable) { mutable_get(id).grabbable = grabbable; }
void Scene::set_physics(ObjectId id, bool physics) { mutable_get(id).physics = physics; }
void Scene::add_tag(ObjectId id, const std::string& tag) { mutable_get(id).tags.insert(tag); }

}  // namespace scenewright
