#pragma once

#include "scenewright/scene.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scenewright {

struct PrefabPart {
  std::string name;
  GeometryKind primitive = GeometryKind::Cube;
  Transform local;
  Color color = Color::light_gray();
  int parent = -1;  // index of an earlier part, or -1 for the prefab root
};

struct PrefabEntry {
  std::string name;
  std::vector<std::string> tags;
  Vec3 default_scale = Vec3::Ones();
  std::vector<PrefabPart> parts;
  /// Axis-aligned bounds of all parts in the root frame at unit scale.
  Geometry bounds;

  [[nodiscard]] bool has_tag(std::string_view tag) const;
};

/// Named catalog of composite geometry usable as a creation source.
class PrefabRegistry {
 public:
  /// Parses a registry document ({schema_version, prefabs[]}); throws
  /// SchemaViolation with the path of the offending field.
  static PrefabRegistry from_json(const nlohmann::json& document);
  static const nlohmann::json& schema();

  void add(PrefabEntry entry);
  [[nodiscard]] const PrefabEntry* find(std::string_view name) const;
  /// Case-insensitive: the longest registry name contained in `object_name`.
  [[nodiscard]] const PrefabEntry* fuzzy_match(std::string_view object_name) const;
  [[nodiscard]] const std::map<std::string, PrefabEntry, std::less<>>& entries() const noexcept { return entries_; }
  [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }

 private:
  std::map<std::string, PrefabEntry, std::less<>> entries_;
};

}  // namespace scenewright
