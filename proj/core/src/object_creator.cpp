#include "scenewright/object_creator.hpp"

#include "scenewright/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace scenewright {

const nlohmann::json& creation_schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["objects"],
    "additionalProperties": false,
    "properties": {
      "objects": {
        "type": "array",
        "minItems": 1,
        "items": {
          "type": "object",
          "required": ["name"],
          "additionalProperties": false,
          "properties": {
            "name": {"type": "string", "minLength": 1},
            "prefab": {"type": "string", "minLength": 1},
            "primitive": {"enum": ["cube", "sphere", "cylinder", "capsule", "plane"]},
            "position": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}},
            "orientation": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}},
            "scale": {"anyOf": [
              {"type": "number", "exclusiveMinimum": 0},
              {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number", "exclusiveMinimum": 0}}
            ]},
            "color": {"anyOf": [
              {"type": "string", "minLength": 1},
              {"type": "array", "minItems": 3, "maxItems": 4, "items": {"type": "number", "minimum": 0, "maximum": 1}}
            ]},
            "parent": {"type": "string", "minLength": 1},
            "physics": {"type": "boolean"},
            "grabbable": {"type": "boolean"},
            "frame": {"enum": ["world", "local"]},
            "tags": {"type": "array", "items": {"type": "string", "minLength": 1}}
          }
        }
      }
    }
  })");
  return kSchema;
}

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + message);
}

bool defaults_to_physics(const PrefabEntry& entry) {
  return entry.has_tag("furniture") || entry.has_tag("supply");
}

}  // namespace

std::vector<CreationSpec> interpret_creation(const nlohmann::json& command, const PrefabRegistry& registry) {
  const nlohmann::json* items = &command;
  if (command.is_object()) {
    auto it = command.find("objects");
    if (it == command.end()) violation("/objects", "missing required property");
    items = &*it;
  }
  if (!items->is_array()) violation("/objects", "expected array");

  std::vector<CreationSpec> specs;
  for (std::size_t i = 0; i < items->size(); ++i) {
    const auto& item = (*items)[i];
    const std::string path = "/objects/" + std::to_string(i);
    if (!item.is_object()) violation(path, "expected object");
    CreationSpec spec;
    if (!item.contains("name") || !item["name"].is_string() || item["name"].get_ref<const std::string&>().empty())
      violation(path + "/name", "missing required property");
    spec.name = item["name"].get<std::string>();

    std::optional<GeometryKind> primitive;
    if (auto it = item.find("primitive"); it != item.end()) {
      primitive = it->is_string() ? geometry_kind_from_string(it->get_ref<const std::string&>()) : std::nullopt;
      if (!primitive || *primitive == GeometryKind::Prefab) violation(path + "/primitive", "unknown primitive");
    }
    const PrefabEntry* prefab = nullptr;
    if (auto it = item.find("prefab"); it != item.end()) {
      const std::string requested = it->get<std::string>();
      prefab = registry.find(requested);
      if (!prefab && !primitive)
        throw Error(ErrorCode::UnknownPrefab, "'" + requested + "' is not in the prefab registry");
    } else if (!primitive) {
      prefab = registry.fuzzy_match(spec.name);
      if (!prefab)
        throw Error(ErrorCode::MissingSource,
                    path + ": '" + spec.name + "' names neither a prefab nor a primitive");
    }
    if (prefab) spec.prefab = prefab->name;
    else spec.primitive = primitive;

    if (auto it = item.find("position"); it != item.end()) {
      spec.position = parse_vec3(*it);
      if (!spec.position) violation(path + "/position", "expected [x, y, z]");
    }
    if (auto it = item.find("orientation"); it != item.end()) {
      auto e = parse_vec3(*it);
      if (!e) violation(path + "/orientation", "expected [yaw, pitch, roll]");
      spec.orientation = Euler{e->x(), e->y(), e->z()}.normalized();
    }
    if (auto it = item.find("scale"); it != item.end()) {
      spec.scale = parse_scale(*it);
      if (!spec.scale) violation(path + "/scale", "expected positive scalar or [x, y, z]");
    }
    if (auto it = item.find("color"); it != item.end()) {
      spec.color = parse_color(*it);
      if (!spec.color) violation(path + "/color", "unrecognized color");
    }
    if (auto it = item.find("parent"); it != item.end()) spec.parent = it->get<std::string>();
    if (auto it = item.find("frame"); it != item.end()) {
      auto f = it->is_string() ? frame_from_string(it->get_ref<const std::string&>()) : std::nullopt;
      if (!f) violation(path + "/frame", "expected \"world\" or \"local\"");
      spec.frame = *f;
    }
    if (spec.frame == Frame::Local && !spec.parent) violation(path + "/parent", "local frame requires a parent");
    spec.physics = item.contains("physics") ? item["physics"].get<bool>() : (prefab && defaults_to_physics(*prefab));
    spec.grabbable = item.value("grabbable", false);
    if (auto it = item.find("tags"); it != item.end())
      for (const auto& t : *it) spec.tags.insert(t.get<std::string>());
    specs.push_back(std::move(spec));
  }
  return specs;
}

CreationResult apply_creation(const std::vector<CreationSpec>& specs, Scene& scene, const PrefabRegistry& registry,
                              const HeadPose& head) {
  Scene working = scene;
  CreationResult result;
  std::map<std::string, ObjectId> created_by_request;

  for (const CreationSpec& spec : specs) {
    std::optional<ObjectId> parent;
    if (spec.parent) {
      if (auto it = created_by_request.find(*spec.parent); it != created_by_request.end()) parent = it->second;
      else parent = working.find_by_name(*spec.parent);
      if (!parent) throw Error(ErrorCode::UnknownParent, "'" + *spec.parent + "' for '" + spec.name + "'");
    }

    const PrefabEntry* prefab = spec.prefab ? registry.find(*spec.prefab) : nullptr;
    if (spec.prefab && !prefab) throw Error(ErrorCode::UnknownPrefab, "'" + *spec.prefab + "'");

    Transform local;
    if (parent) {
      const WorldPose pp = working.world_pose(*parent);
      if (spec.frame == Frame::Local) {
        local.position = spec.position.value_or(Vec3::Zero());
        local.orientation = spec.orientation.value_or(Euler{});
      } else {
        local.position = spec.position ? Vec3(pp.affine.inverse() * (*spec.position - pp.position)) : Vec3::Zero();
        if (spec.orientation) local.orientation = to_euler(pp.rotation.conjugate() * to_quat(*spec.orientation));
      }
    } else {
      local.position = spec.position.value_or(default_spawn_point(head));
      local.orientation = spec.orientation.value_or(Euler{});
    }
    local.scale = spec.scale.value_or(prefab ? prefab->default_scale : Vec3::Ones());

    ObjectSpec root;
    root.name = working.unique_name(spec.name);
    root.local = local;
    root.parent = parent;
    root.color = spec.color.value_or(Color::light_gray());
    root.geometry = prefab ? prefab->bounds : Geometry::primitive(*spec.primitive);
    root.physics = spec.physics;
    root.grabbable = spec.grabbable;
    root.tags = spec.tags;
    if (prefab) root.tags.insert(prefab->tags.begin(), prefab->tags.end());
    const ObjectId root_id = working.add_object(root);
    created_by_request[spec.name] = root_id;
    result.roots.push_back(root_id);
    result.all.push_back(root_id);

    if (prefab) {
      const std::string root_name = working.get(root_id).name;
      std::vector<ObjectId> parts;
      for (const PrefabPart& part : prefab->parts) {
        ObjectSpec ps;
        ps.name = working.unique_name(root_name + "/" + part.name);
        ps.local = part.local;
        ps.parent = part.parent < 0 ? root_id : parts[static_cast<std::size_t>(part.parent)];
        ps.color = spec.color.value_or(part.color);
        ps.geometry = Geometry::primitive(part.primitive);
        parts.push_back(working.add_object(ps));
        result.all.push_back(parts.back());
      }
    }
  }
  scene = std::move(working);
  return result;
}

Eigen::Vector2d SupportSurface::to_footprint(const Vec3& world) const {
  const Vec3 d = Eigen::AngleAxisd(-deg_to_rad(yaw_deg), Vec3::UnitY()) * (world - center);
  return {d.x(), d.z()};
}

Vec3 SupportSurface::from_footprint(const Eigen::Vector2d& uv, double y) const {
  Vec3 d = Eigen::AngleAxisd(deg_to_rad(yaw_deg), Vec3::UnitY()) * Vec3(uv.x(), 0.0, uv.y());
  return {center.x() + d.x(), y, center.z() + d.z()};
}

bool SupportSurface::contains(const Vec3& world) const {
  const Eigen::Vector2d uv = to_footprint(world);
  constexpr double kEps = 1e-9;
  return std::abs(uv.x()) <= half_x + kEps && std::abs(uv.y()) <= half_z + kEps;
}

std::vector<SupportSurface> supports_from_proxies(const std::vector<RoomProxy>& proxies) {
  std::vector<SupportSurface> out;
  for (const auto& p : proxies) {
    SupportSurface s;
    s.label = p.id;
    s.object = p.object;
    s.top = p.top();
    s.center = p.center;
    s.half_x = p.extents.x();
    s.half_z = p.extents.z();
    s.yaw_deg = p.yaw_deg;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SupportSurface> supports_from_scene(const Scene& scene) {
  std::vector<SupportSurface> out;
  for (const auto& [id, obj] : scene.objects()) {
    if (!obj.tags.contains("surface") || !obj.geometry) continue;
    const WorldBox box = *scene.world_box(id);
    SupportSurface s;
    s.label = obj.name;
    s.object = id;
    s.top = box.top();
    s.center = box.center;
    s.half_x = box.half.x();
    s.half_z = box.half.z();
    out.push_back(std::move(s));
  }
  return out;
}

std::string_view to_string(AdjustmentKind kind) noexcept {
  switch (kind) {
    case AdjustmentKind::Snapped: return "snapped";
    case AdjustmentKind::Clamped: return "clamped";
    case AdjustmentKind::Ground: return "ground";
  }
  return "snapped";
}

namespace {

double footprint_distance(const SupportSurface& s, const Vec3& world) {
  const Eigen::Vector2d uv = s.to_footprint(world);
  const double dx = std::max(0.0, std::abs(uv.x()) - s.half_x);
  const double dz = std::max(0.0, std::abs(uv.y()) - s.half_z);
  return std::hypot(dx, dz);
}

double clamp_inside(double v, double half_support, double half_object) {
  const double limit = half_support - half_object;
  if (limit <= 0.0) return 0.0;
  return std::clamp(v, -limit, limit);
}

}  // namespace

std::vector<SupportAdjustment> enforce_support(const std::vector<ObjectId>& created, Scene& scene,
                                               const std::vector<SupportSurface>& supports) {
  constexpr double kRestTolerance = 1e-6;
  std::vector<SupportAdjustment> adjustments;
  for (ObjectId id : created) {
    if (!scene.contains(id)) continue;
    const SceneObject& obj = scene.get(id);
    if (!obj.physics || obj.is_placeholder()) continue;
    const WorldBox box = *scene.world_box(id);
    const double bottom = box.bottom();

    // Surfaces strictly below the object's center and within search depth,
    // never the object itself or anything it carries.
    std::vector<const SupportSurface*> below;
    for (const auto& s : supports) {
      if (s.object && scene.contains(*s.object) && scene.is_descendant(*s.object, id)) continue;
      if (s.top > box.center.y() + 1e-9) continue;
      if (s.top < bottom - kSupportSearchDepth) continue;
      below.push_back(&s);
    }

    const SupportSurface* chosen = nullptr;
    for (const auto* s : below)
      if (s->contains(box.center) && (!chosen || s->top > chosen->top)) chosen = s;

    SupportAdjustment adj;
    adj.object = id;
    adj.name = obj.name;
    adj.from = scene.world_pose(id).position;
    Vec3 new_center = box.center;

    if (chosen) {
      adj.kind = AdjustmentKind::Snapped;
      adj.support = chosen->label;
      new_center.y() = chosen->top + box.half.y();
    } else if (!below.empty()) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto* s : below) {
        const double d = footprint_distance(*s, box.center);
        if (d < best - 1e-12 || (std::abs(d - best) <= 1e-12 && s->top > chosen->top)) {
          best = d;
          chosen = s;
        }
      }
      const double c = std::abs(std::cos(deg_to_rad(chosen->yaw_deg)));
      const double sn = std::abs(std::sin(deg_to_rad(chosen->yaw_deg)));
      const double margin_u = c * box.half.x() + sn * box.half.z();
      const double margin_v = sn * box.half.x() + c * box.half.z();
      Eigen::Vector2d uv = chosen->to_footprint(box.center);
      uv.x() = clamp_inside(uv.x(), chosen->half_x, margin_u);
      uv.y() = clamp_inside(uv.y(), chosen->half_z, margin_v);
      new_center = chosen->from_footprint(uv, chosen->top + box.half.y());
      adj.kind = AdjustmentKind::Clamped;
      adj.support = chosen->label;
    } else {
      adj.kind = AdjustmentKind::Ground;
      adj.support = "ground";
      new_center.y() = box.half.y();
    }

    const Vec3 delta = new_center - box.center;
    if (delta.norm() <= kRestTolerance) continue;
    adj.to = adj.from + delta;
    scene.set_world_position(id, adj.to);
    adjustments.push_back(std::move(adj));
  }
  return adjustments;
}

}  // namespace scenewright
