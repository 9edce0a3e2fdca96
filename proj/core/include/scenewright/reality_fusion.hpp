#pragma once

#include "scenewright/scene.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace scenewright {

enum class Hand { Left, Right };
std::string_view to_string(Hand hand) noexcept;
std::optional<Hand> hand_from_string(std::string_view name) noexcept;

enum class ProxyKind { Plane, Volume };

/// Invisible stand-in for a scanned real-world object. Identified by tags,
/// never by its generic name.
struct RoomProxy {
  std::string id;
  std::string generic_name;
  std::vector<std::string> tags;
  Vec3 center = Vec3::Zero();
  Vec3 extents = Vec3::Zero();  // half sizes
  double yaw_deg = 0.0;
  ProxyKind kind = ProxyKind::Volume;
  ObjectId object;  // scene node standing in for the proxy

  /// Height of the upper face (a plane's surface is its center).
  [[nodiscard]] double top() const {
    return kind == ProxyKind::Plane ? center.y() : center.y() + extents.y();
  }
  [[nodiscard]] bool has_tag(std::string_view tag) const;
};

/// wrist + five fingers x (proximal, intermediate, distal)
inline constexpr std::size_t kHandBoneCount = 16;
const std::array<std::string_view, kHandBoneCount>& hand_bone_names();

struct HandPose {
  Hand hand = Hand::Right;
  Vec3 palm_position = Vec3::Zero();
  Euler palm_orientation;
  std::map<std::string, Vec3> bones;
  double timestamp = 0.0;
};

/// Parses the hand-pose wire body; throws SchemaViolation with the path of
/// the offending field (including any missing bone).
HandPose parse_hand_pose(const nlohmann::json& body);
nlohmann::json to_json(const HandPose& pose);

struct HeadPose {
  Vec3 position = Vec3(0.0, 1.6, 0.0);
  Euler orientation;
};

struct UserContext {
  HeadPose head;
  std::optional<HandPose> left;
  std::optional<HandPose> right;

  [[nodiscard]] const std::optional<HandPose>& hand(Hand h) const { return h == Hand::Left ? left : right; }
};

/// Where content appears when no position is given: 1.5 m ahead of the head
/// along its horizontal heading, 0.3 m below eye height.
Vec3 default_spawn_point(const HeadPose& head);

enum class BlockKind { Grabbable, HandFollow };

struct BuildingBlock {
  BlockKind kind = BlockKind::Grabbable;
  Hand hand = Hand::Right;
  Vec3 offset = Vec3::Zero();  // in the palm frame
};

/// {"block": "grabbable"} or {"block": "hand_follow", "hand": ..., "offset": [..]}.
/// Throws UnknownBlock for any other block name.
BuildingBlock parse_building_block(const nlohmann::json& action);

const nlohmann::json& room_scan_schema();

class RealityFusion {
 public:
  /// Validates the whole document before touching the scene; on success each
  /// proxy becomes an invisible, non-physics node carrying its tags.
  std::vector<RoomProxy> load_room_scan(const nlohmann::json& document, Scene& scene);
  [[nodiscard]] const RoomProxy& resolve_real_anchor(std::string_view tag) const;

  void update_hand_pose(const HandPose& pose);
  void set_head_pose(const HeadPose& head) { user_.head = head; }
  [[nodiscard]] const UserContext& user() const noexcept { return user_; }

  void attach_building_block(Scene& scene, ObjectId object, const BuildingBlock& block);

  /// Grab: reparent a grabbable object under the hand's anchor node.
  void pick(Scene& scene, ObjectId object, Hand hand);
  /// Restores the parent recorded at pick time; returns the released object.
  std::optional<ObjectId> release(Scene& scene, Hand hand);
  [[nodiscard]] std::optional<ObjectId> held(Hand hand) const;

  /// Moves hand anchors to the latest palm poses and re-applies every
  /// hand-follow constraint. Drops constraints whose object is gone.
  void apply_constraints(Scene& scene);

  [[nodiscard]] const std::vector<RoomProxy>& proxies() const noexcept { return proxies_; }
  [[nodiscard]] bool is_proxy(ObjectId id) const;
  [[nodiscard]] Vec3 palm_or_default(Hand hand) const;
  [[nodiscard]] Vec3 follow_target(Hand hand, const Vec3& offset) const;

 private:
  struct Follow {
    Hand hand;
    Vec3 offset;
  };
  struct Grab {
    ObjectId object;
    std::optional<ObjectId> previous_parent;
  };

  ObjectId ensure_anchor(Scene& scene, Hand hand);

  std::vector<RoomProxy> proxies_;
  UserContext user_;
  std::map<ObjectId, Follow> follows_;
  std::map<Hand, ObjectId> anchors_;
  std::map<Hand, Grab> grabs_;
};

}  // namespace scenewright
