#include "scenewright/prefab_registry.hpp"

#include "scenewright/error.hpp"
#include "scenewright/json_schema.hpp"

#include <algorithm>
#include <cctype>
#include <limits>

namespace scenewright {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Bounds of the composite at unit root scale, computed by instantiating the
// parts in a scratch scene so nesting and scale chains match the live scene.
Geometry composite_bounds(const PrefabEntry& entry) {
  Geometry g;
  g.kind = GeometryKind::Prefab;
  g.prefab = entry.name;
  if (entry.parts.empty()) {
    g.dimensions = Vec3::Zero();
    return g;
  }
  Scene scratch;
  ObjectSpec root_spec;
  root_spec.name = "root";
  const ObjectId root = scratch.add_object(root_spec);
  std::vector<ObjectId> ids;
  for (std::size_t i = 0; i < entry.parts.size(); ++i) {
    const PrefabPart& part = entry.parts[i];
    ObjectSpec spec;
    spec.name = "part" + std::to_string(i);
    spec.local = part.local;
    spec.geometry = Geometry::primitive(part.primitive);
    spec.parent = part.parent < 0 ? root : ids[static_cast<std::size_t>(part.parent)];
    ids.push_back(scratch.add_object(spec));
  }
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (ObjectId id : ids) {
    const WorldBox box = *scratch.world_box(id);
    lo = lo.cwiseMin(box.center - box.half);
    hi = hi.cwiseMax(box.center + box.half);
  }
  g.dimensions = hi - lo;
  g.bounds_center = (hi + lo) * 0.5;
  return g;
}

}  // namespace

bool PrefabEntry::has_tag(std::string_view tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

const nlohmann::json& PrefabRegistry::schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["schema_version", "prefabs"],
    "properties": {
      "schema_version": {"type": "integer", "minimum": 1},
      "prefabs": {
        "type": "array",
        "items": {
          "type": "object",
          "required": ["name", "parts"],
          "properties": {
            "name": {"type": "string", "minLength": 1},
            "tags": {"type": "array", "items": {"type": "string"}},
            "default_scale": {"anyOf": [
              {"type": "number", "exclusiveMinimum": 0},
              {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number", "exclusiveMinimum": 0}}
            ]},
            "parts": {
              "type": "array",
              "items": {
                "type": "object",
                "required": ["primitive"],
                "properties": {
                  "name": {"type": "string", "minLength": 1},
                  "primitive": {"enum": ["cube", "sphere", "cylinder", "capsule", "plane"]},
                  "local_position": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}},
                  "local_euler": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}},
                  "local_scale": {"type": "array", "minItems": 3, "maxItems": 3,
                                  "items": {"type": "number", "exclusiveMinimum": 0}},
                  "color": {},
                  "parent": {"type": "integer", "minimum": -1}
                }
              }
            }
          }
        }
      }
    }
  })");
  return kSchema;
}

PrefabRegistry PrefabRegistry::from_json(const nlohmann::json& document) {
  require_schema(schema(), document);
  PrefabRegistry registry;
  const auto& prefabs = document.at("prefabs");
  for (std::size_t i = 0; i < prefabs.size(); ++i) {
    const auto& item = prefabs[i];
    const std::string path = "/prefabs/" + std::to_string(i);
    PrefabEntry entry;
    entry.name = item.at("name").get<std::string>();
    if (registry.find(entry.name))
      throw Error(ErrorCode::SchemaViolation, path + "/name: duplicate prefab '" + entry.name + "'");
    entry.tags = item.value("tags", std::vector<std::string>{});
    if (auto it = item.find("default_scale"); it != item.end()) entry.default_scale = *parse_scale(*it);
    const auto& parts = item.at("parts");
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto& p = parts[k];
      const std::string ppath = path + "/parts/" + std::to_string(k);
      PrefabPart part;
      part.name = p.value("name", "part_" + std::to_string(k));
      part.primitive = *geometry_kind_from_string(p.at("primitive").get<std::string>());
      if (auto it = p.find("local_position"); it != p.end()) part.local.position = *parse_vec3(*it);
      if (auto it = p.find("local_euler"); it != p.end()) {
        const Vec3 e = *parse_vec3(*it);
        part.local.orientation = Euler{e.x(), e.y(), e.z()}.normalized();
      }
      if (auto it = p.find("local_scale"); it != p.end()) part.local.scale = *parse_vec3(*it);
      if (auto it = p.find("color"); it != p.end()) {
        auto c = parse_color(*it);
        if (!c) throw Error(ErrorCode::SchemaViolation, ppath + "/color: unrecognized color");
        part.color = *c;
      }
      part.parent = p.value("parent", -1);
      if (part.parent >= static_cast<int>(k))
        throw Error(ErrorCode::SchemaViolation, ppath + "/parent: must reference an earlier part or -1");
      entry.parts.push_back(std::move(part));
    }
    registry.add(std::move(entry));
  }
  return registry;
}

void PrefabRegistry::add(PrefabEntry entry) {
  entry.bounds = composite_bounds(entry);
  const std::string key = entry.name;
  entries_.insert_or_assign(key, std::move(entry));
}

const PrefabEntry* PrefabRegistry::find(std::string_view name) const {
  if (auto it = entries_.find(name); it != entries_.end()) return &it->second;
  return nullptr;
}

const PrefabEntry* PrefabRegistry::fuzzy_match(std::string_view object_name) const {
  const std::string haystack = lower(object_name);
  const PrefabEntry* best = nullptr;
  for (const auto& [name, entry] : entries_) {
    if (haystack.find(lower(name)) == std::string::npos) continue;
    if (!best || name.size() > best->name.size()) best = &entry;
  }
  return best;
}

}  // namespace scenewright
