#include "scenewright/object_creator.hpp"

#include "scenewright/error.hpp"
#include "scenewright/gateway/replay.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

namespace scenewright {
namespace {

using testing::Gen;

PrefabRegistry fixture_prefabs() {
  return PrefabRegistry::from_json(gateway::read_json(testing::fixture_dir() / "prefabs.json"));
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::NotFound;
}

TEST(PrefabRegistry, ComputesBoundsAndFuzzyMatches) {
  const PrefabRegistry reg = fixture_prefabs();
  const PrefabEntry* table = reg.find("table");
  ASSERT_NE(table, nullptr);
  // Legs reach y = 0 (0.35 - 0.7/2 * 2 / 2), top reaches 0.72 + 0.025.
  EXPECT_NEAR(table->bounds.dimensions.y(), 0.745, 1e-12);
  EXPECT_NEAR(table->bounds.bounds_center.y(), 0.3725, 1e-12);
  EXPECT_NEAR(table->bounds.dimensions.x(), 1.2, 1e-12);
  EXPECT_EQ(reg.fuzzy_match("Big Pencil Holder")->name, "pencil holder");
  EXPECT_EQ(reg.fuzzy_match("coffee cup")->name, "cup");
  EXPECT_EQ(reg.fuzzy_match("spaceship"), nullptr);
}

TEST(PrefabRegistry, RejectsMalformedDocuments) {
  auto doc = nlohmann::json::parse(R"({"schema_version": 1, "prefabs": [{"name": "x", "parts": [{"primitive": "torus"}]}]})");
  try {
    PrefabRegistry::from_json(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaViolation);
    EXPECT_EQ(e.detail().rfind("/prefabs/0/parts/0/primitive", 0), 0u) << e.detail();
  }
}

TEST(ObjectCreator, InterpretsPrimitivesPrefabsAndDefaults) {
  const PrefabRegistry reg = fixture_prefabs();
  const auto specs = interpret_creation(nlohmann::json::parse(R"({"objects": [
    {"name": "box", "primitive": "cube", "scale": 2, "color": "red"},
    {"name": "my cup"},
    {"name": "pad", "prefab": "notebook", "physics": false},
    {"name": "ball", "prefab": "nonexistent", "primitive": "sphere"}
  ]})"),
                                        reg);
  ASSERT_EQ(specs.size(), 4u);
  EXPECT_EQ(specs[0].primitive, GeometryKind::Cube);
  EXPECT_EQ(*specs[0].scale, Vec3(2, 2, 2));
  EXPECT_FALSE(specs[0].physics);
  EXPECT_EQ(specs[1].prefab, "cup");
  EXPECT_TRUE(specs[1].physics);
  EXPECT_FALSE(specs[2].physics);
  EXPECT_EQ(specs[3].primitive, GeometryKind::Sphere);
}

TEST(ObjectCreator, InterpretErrors) {
  const PrefabRegistry reg = fixture_prefabs();
  auto run = [&](const char* text) { return code_of([&] { interpret_creation(nlohmann::json::parse(text), reg); }); };
  EXPECT_EQ(run(R"({"objects": [{"name": "spaceship"}]})"), ErrorCode::MissingSource);
  EXPECT_EQ(run(R"({"objects": [{"name": "x", "prefab": "spaceship"}]})"), ErrorCode::UnknownPrefab);
  EXPECT_EQ(run(R"({"objects": [{"name": "x", "primitive": "cube", "color": "plaid"}]})"), ErrorCode::SchemaViolation);
  EXPECT_EQ(run(R"({"objects": [{"name": "x", "primitive": "cube", "frame": "local"}]})"), ErrorCode::SchemaViolation);
}

TEST(ObjectCreator, ApplyExpandsPrefabPartsUnderRoot) {
  const PrefabRegistry reg = fixture_prefabs();
  Scene scene;
  const auto specs = interpret_creation(nlohmann::json::parse(R"([{"name": "desk", "prefab": "table", "position": [1, 0, 2]}])"), reg);
  const CreationResult r = apply_creation(specs, scene, reg, HeadPose{});
  ASSERT_EQ(r.roots.size(), 1u);
  EXPECT_EQ(r.all.size(), 6u);
  const ObjectId top = *scene.find_by_name("desk/top");
  EXPECT_EQ(scene.get(top).parent, r.roots[0]);
  EXPECT_LT((scene.world_pose(top).position - Vec3(1, 0.72, 2)).norm(), 1e-12);
  EXPECT_TRUE(scene.get(r.roots[0]).tags.contains("furniture"));
}

TEST(ObjectCreator, DefaultSpawnIsAheadOfTheHead) {
  Scene scene;
  HeadPose head;
  head.position = Vec3(0, 1.6, 0);
  head.orientation = {90, 0, 0};
  const auto specs = interpret_creation(nlohmann::json::parse(R"([{"name": "b", "primitive": "cube"}])"), {});
  const auto r = apply_creation(specs, scene, {}, head);
  // 1.5 m along +X (yaw 90), 0.3 m below eye height.
  EXPECT_LT((scene.world_pose(r.roots[0]).position - Vec3(1.5, 1.3, 0)).norm(), 1e-12);
}

TEST(ObjectCreator, ApplyIsAllOrNothing) {
  const PrefabRegistry reg = fixture_prefabs();
  Scene scene;
  scene.add_object(testing::cube_spec("existing"));
  const auto specs = interpret_creation(nlohmann::json::parse(R"([
    {"name": "a", "primitive": "cube"},
    {"name": "b", "primitive": "cube", "parent": "missing"}
  ])"),
                                        reg);
  EXPECT_EQ(code_of([&] { apply_creation(specs, scene, reg, HeadPose{}); }), ErrorCode::UnknownParent);
  EXPECT_EQ(scene.size(), 1u);
  EXPECT_FALSE(scene.find_by_name("a"));
}

TEST(ObjectCreator, DuplicateNamesGetSuffixes) {
  Scene scene;
  scene.add_object(testing::cube_spec("cube"));
  const auto specs = interpret_creation(nlohmann::json::parse(R"([{"name": "cube", "primitive": "cube"}, {"name": "cube", "primitive": "sphere"}])"), {});
  const auto r = apply_creation(specs, scene, {}, HeadPose{});
  EXPECT_EQ(scene.get(r.roots[0]).name, "cube-2");
  EXPECT_EQ(scene.get(r.roots[1]).name, "cube-3");
}

TEST(ObjectCreator, LocalFrameChildUsesParentFrame) {
  Scene scene;
  const auto specs = interpret_creation(nlohmann::json::parse(R"([
    {"name": "base", "primitive": "cube", "position": [1, 1, 1], "orientation": [90, 0, 0], "scale": 2},
    {"name": "knob", "primitive": "sphere", "parent": "base", "frame": "local", "position": [0, 0, 1]},
    {"name": "flag", "primitive": "plane", "parent": "base", "position": [3, 1, 1]}
  ])"),
                                        {});
  const auto r = apply_creation(specs, scene, {}, HeadPose{});
  // Local (0,0,1) under yaw 90, scale 2 -> world offset (2,0,0).
  EXPECT_LT((scene.world_pose(r.roots[1]).position - Vec3(3, 1, 1)).norm(), 1e-12);
  // World-frame child keeps the requested world position.
  EXPECT_LT((scene.world_pose(r.roots[2]).position - Vec3(3, 1, 1)).norm(), 1e-12);
}

SupportSurface table_surface(Vec3 center, double hx, double hz, double top, double yaw) {
  SupportSurface s;
  s.label = "table";
  s.center = center;
  s.half_x = hx;
  s.half_z = hz;
  s.top = top;
  s.yaw_deg = yaw;
  return s;
}

TEST(SupportEnforcement, SnapsOntoTableTop) {
  Scene scene;
  ObjectSpec cup = testing::cube_spec("cup", Vec3(0.1, 1.5, 0.0), Vec3(0.1, 0.2, 0.1));
  cup.physics = true;
  const ObjectId id = scene.add_object(cup);
  const auto adj = enforce_support({id}, scene, {table_surface(Vec3(0, 0.5, 0), 0.6, 0.4, 0.75, 0)});
  ASSERT_EQ(adj.size(), 1u);
  EXPECT_EQ(adj[0].kind, AdjustmentKind::Snapped);
  EXPECT_NEAR(scene.world_pose(id).position.y(), 0.85, 1e-12);
}

TEST(SupportEnforcement, ClampsIntoFootprintClosedForm) {
  Scene scene;
  ObjectSpec cup = testing::cube_spec("cup", Vec3(2.0, 1.5, -3.0), Vec3(0.2, 0.2, 0.2));
  cup.physics = true;
  const ObjectId id = scene.add_object(cup);
  const auto adj = enforce_support({id}, scene, {table_surface(Vec3(0, 0.5, 0), 0.6, 0.4, 0.75, 0)});
  ASSERT_EQ(adj.size(), 1u);
  EXPECT_EQ(adj[0].kind, AdjustmentKind::Clamped);
  // x clamps to 0.6 - 0.1, z to -(0.4 - 0.1); rests on the top.
  EXPECT_LT((scene.world_pose(id).position - Vec3(0.5, 0.85, -0.3)).norm(), 1e-12);
}

TEST(SupportEnforcement, FallsToGroundWithoutSupportBelow) {
  Scene scene;
  ObjectSpec cup = testing::cube_spec("cup", Vec3(0, 0.4, 0), Vec3(0.2, 0.2, 0.2));
  cup.physics = true;
  const ObjectId id = scene.add_object(cup);
  const auto adj = enforce_support({id}, scene, {table_surface(Vec3(0, 0.5, 0), 0.6, 0.4, 0.75, 0)});
  ASSERT_EQ(adj.size(), 1u);
  EXPECT_EQ(adj[0].kind, AdjustmentKind::Ground);
  EXPECT_NEAR(scene.world_pose(id).position.y(), 0.1, 1e-12);
}

TEST(SupportEnforcement, RestingObjectIsNotReported) {
  Scene scene;
  ObjectSpec cup = testing::cube_spec("cup", Vec3(0, 0.85, 0), Vec3(0.2, 0.2, 0.2));
  cup.physics = true;
  const ObjectId id = scene.add_object(cup);
  EXPECT_TRUE(enforce_support({id}, scene, {table_surface(Vec3(0, 0.5, 0), 0.6, 0.4, 0.75, 0)}).empty());
}

TEST(SupportEnforcement, RandomCupTableConfigurations) {
  Gen gen(41);
  for (int trial = 0; trial < 600; ++trial) {
    Scene scene;
    const double top = gen.real(0.4, 1.2);
    const double hx = gen.real(0.3, 1.5);
    const double hz = gen.real(0.3, 1.5);
    const Vec3 center(gen.real(-2, 2), top / 2, gen.real(-2, 2));
    const double yaw = gen.coin() ? 0.0 : gen.real(-180, 180);
    std::vector<SupportSurface> supports = {table_surface(center, hx, hz, top, yaw)};
    if (gen.coin(0.3)) {
      SupportSurface floor = table_surface(Vec3::Zero(), 5, 5, 0.0, 0.0);
      floor.label = "floor";
      supports.push_back(floor);
    }

    std::vector<ObjectId> cups;
    std::vector<std::pair<ObjectId, Vec3>> placeholders;
    const int n = gen.integer(1, 4);
    for (int i = 0; i < n; ++i) {
      const Vec3 scale(gen.real(0.05, 0.3), gen.real(0.05, 0.3), gen.real(0.05, 0.3));
      const Vec3 pos = center + Vec3(gen.real(-2.5, 2.5), top + gen.real(0.05, 2.0), gen.real(-2.5, 2.5));
      ObjectSpec s = testing::cube_spec("cup" + std::to_string(i), pos, scale);
      s.geometry = Geometry::primitive(gen.coin() ? GeometryKind::Cylinder : GeometryKind::Cube);
      s.physics = true;
      cups.push_back(scene.add_object(s));
      ObjectSpec p;
      p.name = "anchor" + std::to_string(i);
      p.local.position = pos;
      p.physics = true;
      placeholders.emplace_back(scene.add_object(p), pos);
    }
    std::vector<ObjectId> all = cups;
    for (const auto& [id, _] : placeholders) all.push_back(id);
    enforce_support(all, scene, supports);

    for (ObjectId id : cups) {
      const WorldBox box = *scene.world_box(id);
      bool supported = false;
      for (const auto& s : supports)
        if (std::abs(box.bottom() - s.top) <= 1e-3 && s.contains(box.center)) supported = true;
      EXPECT_TRUE(supported) << "trial " << trial << " object " << scene.get(id).name;
    }
    for (const auto& [id, pos] : placeholders)
      EXPECT_EQ(scene.world_pose(id).position, pos) << "placeholder moved in trial " << trial;
  }
}

}  // namespace
}  // namespace scenewright
