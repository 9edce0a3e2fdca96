#include "scenewright/animation.hpp"

#include "scenewright/error.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace scenewright {
namespace {

using testing::Gen;

constexpr double kDt = 0.02;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::NotFound;
}

std::uint64_t expected_steps(double seconds) { return static_cast<std::uint64_t>(std::ceil(seconds / kDt - 1e-9)); }

struct Rig {
  Scene scene;
  AnimationLibrary lib{kDt};
  std::vector<std::string> warnings;
  std::vector<AnimationEvent> log;

  Rig() {
    lib.set_warning_sink([this](const std::string& w) { warnings.push_back(w); });
  }
  ObjectId add(const std::string& name, Vec3 pos = Vec3::Zero()) { return scene.add_object(testing::cube_spec(name, pos)); }
  void schedule(const char* json) { lib.schedule(parse_animation_request(nlohmann::json::parse(json))); }
  void schedule(const nlohmann::json& json) { lib.schedule(parse_animation_request(json)); }
  std::vector<AnimationEvent> tick() {
    auto evs = lib.tick(scene);
    log.insert(log.end(), evs.begin(), evs.end());
    return evs;
  }
  std::optional<std::uint64_t> tick_of(const std::string& id, const std::string& kind) const {
    for (const auto& e : log)
      if (e.id == id && e.kind == kind) return e.tick;
    return std::nullopt;
  }
  Vec3 pos(const std::string& name) const { return scene.world_pose(*scene.find_by_name(name)).position; }
};

TEST(AnimationParse, ErrorsAndDefaults) {
  EXPECT_EQ(code_of([] { parse_animation_request(nlohmann::json::parse(R"([{"id": "a", "unit": "teleport", "subject": "x"}])")); }),
            ErrorCode::UnknownUnit);
  EXPECT_EQ(code_of([] { parse_animation_request(nlohmann::json::parse(R"([{"id": "a", "unit": "translate", "subject": "x"}])")); }),
            ErrorCode::MissingTarget);
  EXPECT_EQ(code_of([] { parse_animation_request(nlohmann::json::parse(R"([{"id": "a", "unit": "scaling", "subject": "x", "target": -1}])")); }),
            ErrorCode::MissingTarget);
  EXPECT_EQ(code_of([] { parse_animation_request(nlohmann::json::parse(R"([{"id": "a", "unit": "orbit", "target": "y"}])")); }),
            ErrorCode::MissingTarget);
  const auto specs = parse_animation_request(nlohmann::json::parse(R"([{"id": "c", "unit": "catch", "agent": "robot", "item": "ball", "destination": [1, 0, 1]}])"));
  ASSERT_EQ(specs.size(), 5u);
  EXPECT_EQ(specs[0].id, "c/approach");
  EXPECT_EQ(specs[4].id, "c/release");
  for (const auto& s : specs) EXPECT_EQ(s.sequence_group, "catch:c");
  EXPECT_DOUBLE_EQ(specs[0].standoff, kCatchStandoff);
}

TEST(AnimationKinematics, TwoMetresAtOneMetrePerSecondTakesOneHundredTicks) {
  Rig rig;
  rig.add("cube");
  rig.schedule(R"([{"id": "m", "unit": "translate", "subject": "cube", "target": [2, 0, 0], "speed": 1}])");
  for (int i = 0; i < 120; ++i) rig.tick();
  EXPECT_EQ(rig.tick_of("m", "started"), 1u);
  EXPECT_EQ(rig.tick_of("m", "completed"), 100u);
  EXPECT_EQ(rig.pos("cube"), Vec3(2, 0, 0));
}

TEST(AnimationKinematics, RandomTranslationsFollowTheLinearProfile) {
  Gen gen(11);
  for (int trial = 0; trial < 250; ++trial) {
    Rig rig;
    const Vec3 start = gen.vec(-5, 5);
    const Vec3 end = gen.vec(-5, 5);
    const double speed = gen.real(0.2, 4.0);
    rig.add("cube", start);
    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "m"}, {"unit", "translate"}, {"subject", "cube"},
                                   {"target", {end.x(), end.y(), end.z()}}, {"speed", speed}}}}});
    const std::uint64_t n = std::max<std::uint64_t>(1, expected_steps((end - start).norm() / speed));
    Vec3 prev = start;
    for (std::uint64_t k = 1; k <= n + 2; ++k) {
      rig.tick();
      const Vec3 p = rig.pos("cube");
      const Vec3 oracle = k >= n ? end : Vec3(start + (end - start) * (double(k) / double(n)));
      ASSERT_LT((p - oracle).norm(), 1e-9) << "trial " << trial << " tick " << k;
      ASSERT_LE((p - prev).norm(), speed * kDt + 1e-9) << "trial " << trial << " tick " << k;
      prev = p;
    }
    EXPECT_EQ(rig.tick_of("m", "completed"), n) << "trial " << trial;
  }
}

TEST(AnimationKinematics, RandomSweepsMatchAxisAngleOracle) {
  Gen gen(12);
  for (int trial = 0; trial < 250; ++trial) {
    Rig rig;
    const ObjectId id = rig.add("cube");
    const Euler start = gen.euler();
    Transform t = rig.scene.get(id).local;
    t.orientation = start;
    rig.scene.set_local_transform(id, t);
    const Vec3 axis = gen.unit();
    const double degrees = gen.real(-400, 400);
    const double speed = gen.real(10, 180);
    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "r"}, {"unit", "rotate"}, {"subject", "cube"},
                                   {"axis", {axis.x(), axis.y(), axis.z()}}, {"degrees", degrees}, {"speed", speed}}}}});
    const std::uint64_t n = std::max<std::uint64_t>(1, expected_steps(std::abs(degrees) / speed));
    for (std::uint64_t k = 0; k < n; ++k) rig.tick();
    const Eigen::Matrix3d oracle =
        Eigen::AngleAxisd(degrees * M_PI / 180.0, axis).toRotationMatrix() * to_quat(start).toRotationMatrix();
    const Eigen::Matrix3d got = rig.scene.world_pose(id).rotation.toRotationMatrix();
    EXPECT_LT((got - oracle).norm(), 1e-9) << "trial " << trial;
    EXPECT_EQ(rig.tick_of("r", "completed"), n);
  }
}

TEST(AnimationKinematics, OrbitKeepsItsRadiusForTenThousandTicks) {
  Gen gen(13);
  for (int trial = 0; trial < 200; ++trial) {
    Rig rig;
    const Vec3 center = gen.vec(-3, 3);
    const Vec3 start = center + gen.vec(-2, 2);
    rig.add("sun", center);
    rig.add("planet", start);
    const Vec3 axis = gen.unit();
    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "o"}, {"unit", "orbit"}, {"subject", "planet"}, {"target", "sun"},
                                   {"axis", {axis.x(), axis.y(), axis.z()}}, {"speed", gen.real(5, 90)}}}}});
    const int ticks = trial == 0 ? 10000 : 200;
    const double radius = (start - center).norm();
    double worst = 0.0;
    for (int k = 0; k < ticks; ++k) {
      rig.tick();
      worst = std::max(worst, std::abs((rig.pos("planet") - center).norm() - radius));
    }
    EXPECT_LT(worst, 1e-9) << "trial " << trial;
    // The offset's component along the axis is invariant as well.
    EXPECT_NEAR((rig.pos("planet") - center).dot(axis), (start - center).dot(axis), 1e-9);
    EXPECT_TRUE(rig.lib.is_active("o"));
  }
}

TEST(AnimationKinematics, ScalingAndColoringBlendLinearly) {
  Gen gen(14);
  for (int trial = 0; trial < 200; ++trial) {
    Rig rig;
    const ObjectId id = rig.add("cube");
    const Vec3 target = gen.positive_vec(0.1, 3.0);
    const double duration = 0.02 * gen.integer(2, 150) * 2;  // even step count
    rig.schedule(nlohmann::json{{"animations",
                                 {{{"id", "s"}, {"unit", "scaling"}, {"subject", "cube"},
                                   {"target", {target.x(), target.y(), target.z()}}, {"duration", duration}},
                                  {{"id", "c"}, {"unit", "coloring"}, {"subject", "cube"}, {"target", "blue"},
                                   {"duration", duration}}}}});
    const std::uint64_t n = expected_steps(duration);
    for (std::uint64_t k = 0; k < n / 2; ++k) rig.tick();
    const Vec3 mid = (Vec3::Ones() + target) / 2.0;
    EXPECT_LT((rig.scene.get(id).local.scale - mid).norm(), 1e-9) << "trial " << trial;
    const Color gray = Color::light_gray();
    EXPECT_NEAR(rig.scene.get(id).color.b, (gray.b + 1.0) / 2.0, 1e-9);
    EXPECT_NEAR(rig.scene.get(id).color.r, gray.r / 2.0, 1e-9);
    for (std::uint64_t k = n / 2; k < n; ++k) rig.tick();
    EXPECT_EQ(rig.scene.get(id).local.scale, target);
    EXPECT_EQ(rig.tick_of("s", "completed"), n);
  }
}

TEST(AnimationSequencing, NextStepStartsInTheCompletionTick) {
  Gen gen(15);
  for (int trial = 0; trial < 200; ++trial) {
    Rig rig;
    rig.add("cube");
    const int steps = gen.integer(2, 5);
    nlohmann::json anims = nlohmann::json::array();
    std::vector<std::uint64_t> durations;
    for (int i = 0; i < steps; ++i) {
      const int n = gen.integer(1, 40);
      durations.push_back(static_cast<std::uint64_t>(n));
      const Vec3 p = gen.vec(-2, 2);
      anims.push_back({{"id", "s" + std::to_string(i)}, {"unit", "translate"}, {"subject", "cube"},
                       {"target", {p.x(), p.y(), p.z()}}, {"duration", n * kDt}, {"sequence_group", "seq"}});
    }
    rig.schedule(nlohmann::json{{"animations", anims}});
    for (int k = 0; k < 250; ++k) rig.tick();
    std::uint64_t expected_start = 1;
    for (int i = 0; i < steps; ++i) {
      const std::string id = "s" + std::to_string(i);
      ASSERT_EQ(rig.tick_of(id, "started"), expected_start) << "trial " << trial << " step " << i;
      const std::uint64_t done = expected_start + durations[i] - 1;
      ASSERT_EQ(rig.tick_of(id, "completed"), done) << "trial " << trial << " step " << i;
      expected_start = done;
    }
  }
}

TEST(AnimationSequencing, IndependentGroupsRunConcurrently) {
  Rig rig;
  rig.add("a");
  rig.add("b");
  rig.schedule(R"([{"id": "x", "unit": "translate", "subject": "a", "target": [1, 0, 0], "duration": 1},
                   {"id": "y", "unit": "translate", "subject": "b", "target": [0, 1, 0], "duration": 1}])");
  rig.tick();
  EXPECT_TRUE(rig.lib.is_active("x"));
  EXPECT_TRUE(rig.lib.is_active("y"));
}

TEST(AnimationLibrary, DuplicateActiveIdsAreRejectedAtomically) {
  Rig rig;
  rig.add("cube");
  rig.schedule(R"([{"id": "spin", "unit": "rotate", "subject": "cube", "axis": "y"}])");
  EXPECT_EQ(code_of([&] { rig.schedule(R"([{"id": "fresh", "unit": "rotate", "subject": "cube", "axis": "x"},
                                          {"id": "spin", "unit": "rotate", "subject": "cube", "axis": "y"}])"); }),
            ErrorCode::DuplicateActiveId);
  EXPECT_FALSE(rig.lib.is_queued("fresh"));
  EXPECT_EQ(code_of([&] { rig.schedule(R"([{"id": "d", "unit": "detach", "subject": "cube"},
                                          {"id": "d", "unit": "detach", "subject": "cube"}])"); }),
            ErrorCode::DuplicateActiveId);
  // A finished id can be reused.
  rig.schedule(R"([{"id": "once", "unit": "detach", "subject": "cube"}])");
  rig.tick();
  rig.schedule(R"([{"id": "once", "unit": "detach", "subject": "cube"}])");
}

TEST(AnimationLibrary, StopLeavesTheSubjectInPlace) {
  Rig rig;
  rig.add("cube");
  rig.schedule(R"([{"id": "m", "unit": "translate", "subject": "cube", "target": [10, 0, 0], "speed": 1}])");
  for (int i = 0; i < 10; ++i) rig.tick();
  const auto evs = rig.lib.stop("m");
  ASSERT_EQ(evs.size(), 1u);
  EXPECT_EQ(evs[0].kind, "stopped");
  const Vec3 here = rig.pos("cube");
  EXPECT_NEAR(here.x(), 0.2, 1e-12);
  rig.tick();
  EXPECT_EQ(rig.pos("cube"), here);
  EXPECT_EQ(rig.lib.take_settled_subjects().size(), 1u);
  EXPECT_EQ(code_of([&] { rig.lib.stop("never"); }), ErrorCode::NotFound);
  EXPECT_TRUE(rig.lib.stop("m").empty());
  EXPECT_FALSE(rig.warnings.empty());
}

TEST(AnimationLibrary, StopUnitEndsAnotherAnimationAndCompletes) {
  Rig rig;
  rig.add("cube");
  rig.schedule(R"([{"id": "spin", "unit": "rotate", "subject": "cube", "axis": "y"}])");
  rig.tick();
  rig.schedule(R"([{"id": "halt", "unit": "stop", "target": "spin"}])");
  rig.tick();
  EXPECT_EQ(rig.tick_of("spin", "stopped"), 2u);
  EXPECT_EQ(rig.tick_of("halt", "completed"), 2u);
  EXPECT_TRUE(rig.lib.idle());
}

TEST(AnimationLibrary, DestroyRemovesObjectAndDependentAnimations) {
  Rig rig;
  rig.add("sun");
  rig.add("planet", Vec3(1, 0, 0));
  rig.schedule(R"([{"id": "o", "unit": "orbit", "subject": "planet", "target": "sun", "axis": "y"}])");
  rig.tick();
  rig.schedule(R"([{"id": "boom", "unit": "destroy", "subject": "sun"}])");
  rig.tick();
  EXPECT_FALSE(rig.scene.find_by_name("sun"));
  EXPECT_EQ(rig.tick_of("o", "stopped"), 2u);
  EXPECT_EQ(rig.tick_of("boom", "completed"), 2u);
}

TEST(AnimationLibrary, UnresolvableSubjectIsSkipped) {
  Rig rig;
  rig.schedule(R"([{"id": "m", "unit": "translate", "subject": "ghost", "target": [1, 0, 0]}])");
  rig.tick();
  EXPECT_EQ(rig.tick_of("m", "skipped"), 1u);
  EXPECT_EQ(rig.warnings.size(), 1u);
}

TEST(AnimationLibrary, CatchCarriesItemToDestination) {
  Rig rig;
  const ObjectId robot = rig.add("robot");
  const ObjectId ball = rig.add("ball", Vec3(2, 0, 0));
  rig.schedule(R"([{"id": "c", "unit": "catch", "agent": "robot", "item": "ball", "destination": [-1, 0, 1]}])");
  for (int i = 0; i < 400; ++i) rig.tick();
  EXPECT_LT((rig.pos("ball") - Vec3(-1, 0, 1)).norm(), 1e-9);
  EXPECT_FALSE(rig.scene.get(ball).parent.has_value());
  // Approach stops 0.3 m short; the carry shifts the robot with the ball.
  EXPECT_LT((rig.scene.world_pose(robot).position - Vec3(-1.3, 0, 1)).norm(), 1e-9);
  for (const char* step : {"c/approach", "c/face", "c/attach", "c/carry", "c/release"})
    EXPECT_TRUE(rig.tick_of(step, "completed")) << step;
  EXPECT_EQ(rig.tick_of("c/face", "started"), rig.tick_of("c/approach", "completed"));
}

TEST(AnimationLibrary, StoppingCatchStopsItsSteps) {
  Rig rig;
  rig.add("robot");
  rig.add("ball", Vec3(2, 0, 0));
  rig.schedule(R"([{"id": "c", "unit": "catch", "agent": "robot", "item": "ball", "destination": [-1, 0, 1]}])");
  rig.tick();
  const auto evs = rig.lib.stop("c");
  EXPECT_EQ(evs.size(), 5u);
  EXPECT_TRUE(rig.lib.idle());
}

TEST(AnimationLibrary, ProgressReportsFraction) {
  Rig rig;
  rig.add("cube");
  rig.schedule(R"([{"id": "m", "unit": "translate", "subject": "cube", "target": [1, 0, 0], "duration": 1}])");
  for (int i = 0; i < 25; ++i) rig.tick();
  const auto active = rig.lib.active(rig.scene);
  ASSERT_EQ(active.size(), 1u);
  EXPECT_DOUBLE_EQ(active[0].progress, 0.5);
}

}  // namespace
}  // namespace scenewright
