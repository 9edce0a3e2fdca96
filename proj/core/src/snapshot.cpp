#include "scenewright/snapshot.hpp"

#include "scenewright/canonical_json.hpp"

namespace scenewright {

nlohmann::json to_json(const SceneObject& obj) {
  nlohmann::json j;
  j["id"] = obj.id.value;
  j["name"] = obj.name;
  j["parent"] = obj.parent ? nlohmann::json(obj.parent->value) : nlohmann::json(nullptr);
  j["local"] = {{"position", to_json(obj.local.position)},
                {"orientation", to_json(obj.local.orientation)},
                {"scale", to_json(obj.local.scale)}};
  j["color"] = to_json(obj.color);
  if (obj.geometry) {
    nlohmann::json g = {{"kind", std::string(to_string(obj.geometry->kind))},
                        {"dimensions", to_json(obj.geometry->dimensions)}};
    if (!obj.geometry->prefab.empty()) g["prefab"] = obj.geometry->prefab;
    j["geometry"] = std::move(g);
  } else {
    j["geometry"] = nullptr;
  }
  j["physics"] = obj.physics;
  j["grabbable"] = obj.grabbable;
  j["visible"] = obj.visible;
  j["is_placeholder"] = obj.is_placeholder();
  j["tags"] = obj.tags;
  return j;
}

nlohmann::json SceneSnapshot::to_json() const {
  nlohmann::json objs = nlohmann::json::array();
  for (const auto& state : objects) {
    nlohmann::json j = scenewright::to_json(state.object);
    j["world"] = {{"position", scenewright::to_json(state.world_position)},
                  {"orientation", scenewright::to_json(state.world_orientation)},
                  {"scale", scenewright::to_json(state.world_scale)}};
    objs.push_back(std::move(j));
  }
  nlohmann::json anims = nlohmann::json::array();
  for (const auto& a : active_animations)
    anims.push_back({{"id", a.id}, {"unit", a.unit}, {"subject", a.subject}, {"progress", a.progress}});
  return {{"tick", tick}, {"objects", std::move(objs)}, {"active_animations", std::move(anims)}};
}

std::string SceneSnapshot::serialize() const { return canonical_dump(to_json()); }

const ObjectState* SceneSnapshot::find(std::string_view name) const {
  for (const auto& s : objects)
    if (s.object.name == name) return &s;
  return nullptr;
}

SceneSnapshot capture(const Scene& scene, std::uint64_t tick, std::vector<AnimationStatus> animations) {
  SceneSnapshot snap;
  snap.tick = tick;
  snap.objects.reserve(scene.size());
  for (const auto& [id, obj] : scene.objects()) {
    const WorldPose pose = scene.world_pose(id);
    snap.objects.push_back({obj, pose.position, to_euler(pose.rotation), pose.scale});
  }
  snap.active_animations = std::move(animations);
  return snap;
}

}  // namespace scenewright
