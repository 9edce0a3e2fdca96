#include "scenewright/reality_fusion.hpp"

#include "scenewright/error.hpp"
#include "scenewright/json_schema.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace scenewright {

std::string_view to_string(Hand hand) noexcept { return hand == Hand::Left ? "left" : "right"; }

std::optional<Hand> hand_from_string(std::string_view name) noexcept {
  if (name == "left") return Hand::Left;
  if (name == "right") return Hand::Right;
  return std::nullopt;
}

bool RoomProxy::has_tag(std::string_view tag) const {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

const std::array<std::string_view, kHandBoneCount>& hand_bone_names() {
  static const std::array<std::string_view, kHandBoneCount> kNames = {
      "wrist",
      "thumb_proximal",  "thumb_intermediate",  "thumb_distal",
      "index_proximal",  "index_intermediate",  "index_distal",
      "middle_proximal", "middle_intermediate", "middle_distal",
      "ring_proximal",   "ring_intermediate",   "ring_distal",
      "pinky_proximal",  "pinky_intermediate",  "pinky_distal",
  };
  return kNames;
}

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::SchemaViolation, path + ": " + message);
}

Vec3 require_vec3(const nlohmann::json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) violation(path + "/" + key, "missing required property");
  auto v = parse_vec3(*it);
  if (!v) violation(path + "/" + key, "expected [x, y, z]");
  return *v;
}

}  // namespace

HandPose parse_hand_pose(const nlohmann::json& body) {
  if (!body.is_object()) violation("", "expected object");
  HandPose pose;
  auto hand = body.find("hand");
  if (hand == body.end() || !hand->is_string()) violation("/hand", "expected \"left\" or \"right\"");
  auto h = hand_from_string(hand->get_ref<const std::string&>());
  if (!h) violation("/hand", "expected \"left\" or \"right\"");
  pose.hand = *h;
  pose.palm_position = require_vec3(body, "palm_position", "");
  if (body.contains("palm_orientation")) {
    const Vec3 e = require_vec3(body, "palm_orientation", "");
    pose.palm_orientation = Euler{e.x(), e.y(), e.z()};
  }
  auto ts = body.find("timestamp");
  if (ts == body.end() || !ts->is_number() || !std::isfinite(ts->get<double>()))
    violation("/timestamp", "expected number");
  pose.timestamp = ts->get<double>();
  auto bones = body.find("bones");
  if (bones == body.end() || !bones->is_object()) violation("/bones", "expected object");
  for (std::string_view name : hand_bone_names()) {
    const std::string key(name);
    pose.bones[key] = require_vec3(*bones, key, "/bones");
  }
  return pose;
}

nlohmann::json to_json(const HandPose& pose) {
  nlohmann::json bones = nlohmann::json::object();
  for (const auto& [name, p] : pose.bones) bones[name] = to_json(p);
  return {{"hand", std::string(to_string(pose.hand))},
          {"palm_position", to_json(pose.palm_position)},
          {"palm_orientation", to_json(pose.palm_orientation)},
          {"bones", std::move(bones)},
          {"timestamp", pose.timestamp}};
}

Vec3 default_spawn_point(const HeadPose& head) {
  const double yaw = deg_to_rad(head.orientation.yaw);
  const Vec3 heading(std::sin(yaw), 0.0, std::cos(yaw));
  return head.position + 1.5 * heading + Vec3(0.0, -0.3, 0.0);
}

BuildingBlock parse_building_block(const nlohmann::json& action) {
  BuildingBlock block;
  const auto name = action.value("block", std::string{});
  if (name == "grabbable") {
    block.kind = BlockKind::Grabbable;
    return block;
  }
  if (name != "hand_follow") throw Error(ErrorCode::UnknownBlock, "'" + name + "'");
  block.kind = BlockKind::HandFollow;
  if (auto it = action.find("hand"); it != action.end()) {
    auto h = it->is_string() ? hand_from_string(it->get_ref<const std::string&>()) : std::nullopt;
    if (!h) throw Error(ErrorCode::SchemaViolation, "/hand: expected \"left\" or \"right\"");
    block.hand = *h;
  }
  if (auto it = action.find("offset"); it != action.end()) {
    auto v = parse_vec3(*it);
    if (!v) throw Error(ErrorCode::SchemaViolation, "/offset: expected [x, y, z]");
    block.offset = *v;
  }
  return block;
}

const nlohmann::json& room_scan_schema() {
  static const nlohmann::json kSchema = nlohmann::json::parse(R"({
    "type": "object",
    "required": ["schema_version", "proxies"],
    "properties": {
      "schema_version": {"type": "integer", "minimum": 1},
      "proxies": {
        "type": "array",
        "items": {
          "type": "object",
          "required": ["id", "kind", "tags", "center", "extents"],
          "properties": {
            "id": {"type": "string", "minLength": 1},
            "kind": {"enum": ["plane", "volume"]},
            "tags": {"type": "array", "items": {"type": "string", "minLength": 1}},
            "center": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number"}},
            "extents": {"type": "array", "minItems": 3, "maxItems": 3, "items": {"type": "number", "minimum": 0}},
            "yaw_deg": {"type": "number"}
          }
        }
      }
    }
  })");
  return kSchema;
}

std::vector<RoomProxy> RealityFusion::load_room_scan(const nlohmann::json& document, Scene& scene) {
  require_schema(room_scan_schema(), document);

  std::set<std::string> ids;
  for (const auto& p : proxies_) ids.insert(p.id);
  std::vector<RoomProxy> parsed;
  const auto& items = document.at("proxies");
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& item = items[i];
    const std::string path = "/proxies/" + std::to_string(i);
    RoomProxy proxy;
    proxy.id = item.at("id").get<std::string>();
    if (!ids.insert(proxy.id).second) violation(path + "/id", "duplicate proxy id '" + proxy.id + "'");
    proxy.kind = item.at("kind") == "plane" ? ProxyKind::Plane : ProxyKind::Volume;
    proxy.generic_name = proxy.kind == ProxyKind::Plane ? "invisible plane" : "invisible volume";
    proxy.tags = item.at("tags").get<std::vector<std::string>>();
    proxy.center = *parse_vec3(item.at("center"));
    proxy.extents = *parse_vec3(item.at("extents"));
    proxy.yaw_deg = item.value("yaw_deg", 0.0);
    if (proxy.kind == ProxyKind::Plane && proxy.extents.y() != 0.0)
      violation(path + "/extents", "planes must have zero vertical extent");
    parsed.push_back(std::move(proxy));
  }

  for (auto& proxy : parsed) {
    ObjectSpec spec;
    spec.name = scene.unique_name(proxy.generic_name);
    spec.local.position = proxy.center;
    spec.local.orientation = Euler{proxy.yaw_deg, 0.0, 0.0};
    Geometry g = Geometry::primitive(proxy.kind == ProxyKind::Plane ? GeometryKind::Plane : GeometryKind::Cube);
    g.dimensions = proxy.extents * 2.0;
    spec.geometry = g;
    spec.visible = false;
    spec.physics = false;
    spec.tags.insert(proxy.tags.begin(), proxy.tags.end());
    proxy.object = scene.add_object(spec);
    proxies_.push_back(proxy);
  }
  return parsed;
}

const RoomProxy& RealityFusion::resolve_real_anchor(std::string_view tag) const {
  const RoomProxy* best = nullptr;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const auto& p : proxies_) {
    if (!p.has_tag(tag)) continue;
    const double d2 = (p.center - user_.head.position).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = &p;
    }
  }
  if (!best) throw Error(ErrorCode::NotFound, "no real-world proxy tagged '" + std::string(tag) + "'");
  return *best;
}

bool RealityFusion::is_proxy(ObjectId id) const {
  return std::any_of(proxies_.begin(), proxies_.end(), [&](const RoomProxy& p) { return p.object == id; });
}

void RealityFusion::update_hand_pose(const HandPose& pose) {
  auto& slot = pose.hand == Hand::Left ? user_.left : user_.right;
  if (slot && pose.timestamp < slot->timestamp) {
    throw Error(ErrorCode::StaleTimestamp, std::string(to_string(pose.hand)) + " hand pose at t=" +
                                               std::to_string(pose.timestamp) + " is older than t=" +
                                               std::to_string(slot->timestamp));
  }
  slot = pose;
}

Vec3 RealityFusion::palm_or_default(Hand hand) const {
  if (const auto& pose = user_.hand(hand)) return pose->palm_position;
  return default_spawn_point(user_.head);
}

Vec3 RealityFusion::follow_target(Hand hand, const Vec3& offset) const {
  if (const auto& pose = user_.hand(hand)) return pose->palm_position + to_quat(pose->palm_orientation) * offset;
  return default_spawn_point(user_.head);
}

void RealityFusion::attach_building_block(Scene& scene, ObjectId object, const BuildingBlock& block) {
  if (!scene.contains(object)) throw Error(ErrorCode::UnknownObject, "id " + std::to_string(object.value));
  switch (block.kind) {
    case BlockKind::Grabbable:
      scene.set_grabbable(object, true);
      break;
    case BlockKind::HandFollow:
      follows_[object] = Follow{block.hand, block.offset};
      scene.set_world_position(object, follow_target(block.hand, block.offset));
      break;
  }
}

ObjectId RealityFusion::ensure_anchor(Scene& scene, Hand hand) {
  if (auto it = anchors_.find(hand); it != anchors_.end() && scene.contains(it->second)) return it->second;
  ObjectSpec spec;
  spec.name = scene.unique_name("hand_anchor_" + std::string(to_string(hand)));
  spec.local.position = palm_or_default(hand);
  if (const auto& pose = user_.hand(hand)) spec.local.orientation = pose->palm_orientation;
  spec.visible = false;
  spec.tags.insert("hand_anchor");
  const ObjectId id = scene.add_object(spec);
  anchors_[hand] = id;
  return id;
}

void RealityFusion::pick(Scene& scene, ObjectId object, Hand hand) {
  const SceneObject& obj = scene.get(object);
  if (!obj.grabbable) throw Error(ErrorCode::NotFound, "'" + obj.name + "' is not grabbable");
  if (grabs_.contains(hand)) release(scene, hand);
  for (const auto& [h, g] : grabs_)
    if (g.object == object) release(scene, h);
  const ObjectId anchor = ensure_anchor(scene, hand);
  grabs_[hand] = Grab{object, scene.get(object).parent};
  scene.set_parent(object, anchor, true);
}

std::optional<ObjectId> RealityFusion::release(Scene& scene, Hand hand) {
  auto it = grabs_.find(hand);
  if (it == grabs_.end()) return std::nullopt;
  const Grab grab = it->second;
  grabs_.erase(it);
  if (!scene.contains(grab.object)) return std::nullopt;
  std::optional<ObjectId> parent = grab.previous_parent;
  if (parent && !scene.contains(*parent)) parent.reset();
  scene.set_parent(grab.object, parent, true);
  return grab.object;
}

std::optional<ObjectId> RealityFusion::held(Hand hand) const {
  if (auto it = grabs_.find(hand); it != grabs_.end()) return it->second.object;
  return std::nullopt;
}

void RealityFusion::apply_constraints(Scene& scene) {
  for (const auto& [hand, anchor] : anchors_) {
    if (!scene.contains(anchor)) continue;
    Transform t = scene.get(anchor).local;
    t.position = palm_or_default(hand);
    if (const auto& pose = user_.hand(hand)) t.orientation = pose->palm_orientation;
    scene.set_local_transform(anchor, t);
  }
  for (auto it = follows_.begin(); it != follows_.end();) {
    if (!scene.contains(it->first)) {
      it = follows_.erase(it);
      continue;
    }
    scene.set_world_position(it->first, follow_target(it->second.hand, it->second.offset));
    ++it;
  }
}

}  // namespace scenewright
