#include "scenewright/reality_fusion.hpp"

#include "scenewright/error.hpp"
#include "scenewright/gateway/replay.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

namespace scenewright {
namespace {

nlohmann::json hand_body(const std::string& hand, Vec3 palm, double t) {
  nlohmann::json bones = nlohmann::json::object();
  for (auto name : hand_bone_names()) bones[std::string(name)] = {palm.x(), palm.y(), palm.z()};
  return {{"hand", hand},
          {"palm_position", {palm.x(), palm.y(), palm.z()}},
          {"palm_orientation", {0, 0, 0}},
          {"bones", bones},
          {"timestamp", t}};
}

nlohmann::json room_scan() { return gateway::read_json(testing::fixture_dir() / "room_scan.json"); }

TEST(RealityFusion, LoadsProxiesAsInvisibleTaggedNodes) {
  Scene scene;
  RealityFusion fusion;
  const auto proxies = fusion.load_room_scan(room_scan(), scene);
  ASSERT_EQ(proxies.size(), 4u);
  const RoomProxy& table = fusion.resolve_real_anchor("table");
  EXPECT_EQ(table.id, "table_0");
  EXPECT_DOUBLE_EQ(table.top(), 0.75);
  const SceneObject& node = scene.get(table.object);
  EXPECT_FALSE(node.visible);
  EXPECT_FALSE(node.physics);
  EXPECT_TRUE(node.tags.contains("surface"));
  EXPECT_EQ(node.name.rfind("invisible volume", 0), 0u);
  EXPECT_TRUE(fusion.is_proxy(table.object));
  EXPECT_DOUBLE_EQ(fusion.resolve_real_anchor("floor").top(), 0.0);
}

TEST(RealityFusion, ResolvesNearestProxyForSharedTag) {
  Scene scene;
  RealityFusion fusion;
  auto doc = nlohmann::json::parse(R"({"schema_version": 1, "proxies": [
    {"id": "t1", "kind": "volume", "tags": ["table"], "center": [5, 0.4, 0], "extents": [0.5, 0.4, 0.5]},
    {"id": "t2", "kind": "volume", "tags": ["table"], "center": [-1, 0.4, 0], "extents": [0.5, 0.4, 0.5]}]})");
  fusion.load_room_scan(doc, scene);
  EXPECT_EQ(fusion.resolve_real_anchor("table").id, "t2");
  HeadPose head;
  head.position = Vec3(4, 1.6, 0);
  fusion.set_head_pose(head);
  EXPECT_EQ(fusion.resolve_real_anchor("table").id, "t1");
  try {
    (void)fusion.resolve_real_anchor("bed");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotFound);
  }
}

TEST(RealityFusion, InvalidScanLeavesSceneUntouched) {
  Scene scene;
  RealityFusion fusion;
  auto doc = room_scan();
  doc["proxies"][2]["extents"] = {1, -1, 1};
  try {
    fusion.load_room_scan(doc, scene);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_EQ(e.detail().rfind("/proxies/2/extents/1", 0), 0u) << e.detail();
  }
  EXPECT_EQ(scene.size(), 0u);
  EXPECT_TRUE(fusion.proxies().empty());

  auto dup = room_scan();
  dup["proxies"][1]["id"] = "floor_0";
  EXPECT_THROW(fusion.load_room_scan(dup, scene), Error);
  EXPECT_EQ(scene.size(), 0u);
}

TEST(RealityFusion, HandPoseRequiresEveryBone) {
  auto body = hand_body("left", Vec3(0, 1, 0), 1.0);
  EXPECT_EQ(parse_hand_pose(body).hand, Hand::Left);
  body["bones"].erase("ring_distal");
  try {
    parse_hand_pose(body);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_NE(e.detail().find("ring_distal"), std::string::npos) << e.detail();
  }
}

TEST(RealityFusion, StaleHandPoseIsRejected) {
  RealityFusion fusion;
  fusion.update_hand_pose(parse_hand_pose(hand_body("right", Vec3(0, 1, 0), 2.0)));
  try {
    fusion.update_hand_pose(parse_hand_pose(hand_body("right", Vec3(1, 1, 0), 1.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleTimestamp);
  }
  EXPECT_EQ(fusion.user().right->palm_position, Vec3(0, 1, 0));
  // The other hand keeps its own clock.
  fusion.update_hand_pose(parse_hand_pose(hand_body("left", Vec3(1, 1, 0), 1.0)));
  EXPECT_TRUE(fusion.user().left.has_value());
}

TEST(RealityFusion, PickFollowsHandAndReleaseRestoresParent) {
  Scene scene;
  RealityFusion fusion;
  const ObjectId shelf = scene.add_object(testing::cube_spec("shelf", Vec3(0, 1, 0)));
  ObjectSpec cube = testing::cube_spec("cube", Vec3(0.5, 0.2, 0), Vec3(0.2, 0.2, 0.2));
  cube.parent = shelf;
  const ObjectId id = scene.add_object(cube);
  EXPECT_THROW(fusion.pick(scene, id, Hand::Right), Error);

  fusion.attach_building_block(scene, id, parse_building_block(nlohmann::json{{"block", "grabbable"}}));
  fusion.update_hand_pose(parse_hand_pose(hand_body("right", Vec3(0.5, 1.2, 0), 1.0)));
  fusion.pick(scene, id, Hand::Right);
  EXPECT_EQ(fusion.held(Hand::Right), id);
  const Vec3 before = scene.world_pose(id).position;
  EXPECT_LT((before - Vec3(0.5, 1.2, 0)).norm(), 1e-12);

  fusion.update_hand_pose(parse_hand_pose(hand_body("right", Vec3(1.0, 1.5, 0.5), 2.0)));
  fusion.apply_constraints(scene);
  EXPECT_LT((scene.world_pose(id).position - Vec3(1.0, 1.5, 0.5)).norm(), 1e-12);

  EXPECT_EQ(fusion.release(scene, Hand::Right), id);
  EXPECT_EQ(scene.get(id).parent, shelf);
  EXPECT_LT((scene.world_pose(id).position - Vec3(1.0, 1.5, 0.5)).norm(), 1e-12);
  EXPECT_FALSE(fusion.release(scene, Hand::Right));
}

TEST(RealityFusion, HandFollowTracksPalmWithOffset) {
  Scene scene;
  RealityFusion fusion;
  const ObjectId id = scene.add_object(testing::cube_spec("light"));
  auto block = parse_building_block(nlohmann::json::parse(R"({"block": "hand_follow", "hand": "left", "offset": [0, 0.1, 0]})"));
  fusion.attach_building_block(scene, id, block);
  // No hand seen yet: default spawn point.
  EXPECT_LT((scene.world_pose(id).position - default_spawn_point(HeadPose{})).norm(), 1e-12);
  fusion.update_hand_pose(parse_hand_pose(hand_body("left", Vec3(-0.3, 1.1, 0.4), 1.0)));
  fusion.apply_constraints(scene);
  EXPECT_LT((scene.world_pose(id).position - Vec3(-0.3, 1.2, 0.4)).norm(), 1e-12);
  scene.destroy_object(id);
  fusion.apply_constraints(scene);
}

TEST(RealityFusion, UnknownBlockIsRejected) {
  try {
    parse_building_block(nlohmann::json{{"block", "teleporter"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownBlock);
  }
}

}  // namespace
}  // namespace scenewright
