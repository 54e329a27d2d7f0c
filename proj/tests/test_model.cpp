#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "fleet/canonical.hpp"
#include "support.hpp"

using namespace fleet;
using fleet::testing::Gen;

TEST(Classify, PatternDecidesKind) {
  EXPECT_EQ(classify_interaction(PlatformKind::aerial, PlatformKind::quadruped,
                                 InteractionPattern::independent_verification),
            C3Kind::corroboration);
  EXPECT_EQ(classify_interaction(PlatformKind::quadruped, PlatformKind::wheeled, InteractionPattern::assistance_on_fault),
            C3Kind::collaboration);
  EXPECT_EQ(classify_interaction(PlatformKind::aerial, PlatformKind::quadruped, InteractionPattern::joint_task_step),
            C3Kind::cooperation);
}

TEST(Classify, UnknownPatternThrows) {
  EXPECT_THROW(classify_interaction(PlatformKind::aerial, PlatformKind::quadruped, "gossip"), ClassificationError);
  EXPECT_EQ(classify_interaction(PlatformKind::aerial, PlatformKind::quadruped, "joint_task_step"),
            C3Kind::cooperation);
}

TEST(Classify, EveryKindPairMapsToExactlyOneKind) {
  const std::vector<PlatformKind> kinds{PlatformKind::quadruped, PlatformKind::wheeled, PlatformKind::aerial,
                                        PlatformKind::fixed_camera, PlatformKind::human_operator};
  const std::vector<std::pair<InteractionPattern, C3Kind>> expected{
      {InteractionPattern::joint_task_step, C3Kind::cooperation},
      {InteractionPattern::assistance_on_fault, C3Kind::collaboration},
      {InteractionPattern::independent_verification, C3Kind::corroboration}};
  for (auto a : kinds) {
    for (auto b : kinds) {
      for (const auto& [p, k] : expected) EXPECT_EQ(classify_interaction(a, b, p), k);
    }
  }
}

TEST(Canonical, EmptyObject) { EXPECT_EQ(canonical_serialize(Json::object()), "{}"); }

TEST(Canonical, SortedKeysNoWhitespace) {
  Json j;
  j["zeta"] = 1;
  j["alpha"] = Json{{"b", 2}, {"a", 0.5}};
  EXPECT_EQ(canonical_serialize(j), R"({"alpha":{"a":0.5,"b":2},"zeta":1})");
}

TEST(Canonical, ShortestRoundTripNumbers) {
  EXPECT_EQ(canonical_serialize(Json(0.1)), "0.1");
  EXPECT_EQ(canonical_serialize(Json(1e-7)), "1e-07");
  const double third = 1.0 / 3.0;
  EXPECT_EQ(canonical_parse(canonical_serialize(Json(third))).get<double>(), third);
}

TEST(Canonical, NonFiniteRejected) {
  EXPECT_THROW(canonical_serialize(Json(std::numeric_limits<double>::quiet_NaN())), SerializationError);
  EXPECT_THROW(canonical_serialize(Json{{"x", {1.0, std::numeric_limits<double>::infinity()}}}), SerializationError);
  Pose2D p;
  p.x = std::numeric_limits<double>::infinity();
  EXPECT_THROW(canonical_serialize(p), SerializationError);
}

TEST(Canonical, MalformedInputRejected) {
  EXPECT_THROW(canonical_parse("{\"a\":"), SerializationError);
  EXPECT_THROW(canonical_deserialize<Pose2D>("{\"x\":1}"), SerializationError);
}

// Property: serialize(deserialize(b)) = b over a generated corpus, checked
// through an independent re-parse.
TEST(Canonical, GeneratedCorpusRoundTrips) {
  Gen g(20240611);
  for (int i = 0; i < 2000; ++i) {
    const Json v = g.value(4);
    const std::string bytes = canonical_serialize(v);
    EXPECT_EQ(Json::parse(bytes), v);
    EXPECT_EQ(canonical_serialize(canonical_parse(bytes)), bytes);
    EXPECT_EQ(canonical_serialize(v), bytes);
  }
}

TEST(Canonical, DomainRecordsRoundTrip) {
  Gen g(7);
  for (int i = 0; i < 300; ++i) {
    const Pose2D pose(g.real(-50, 50), g.real(-50, 50), g.real(-10, 10));
    EXPECT_EQ(canonical_deserialize<Pose2D>(canonical_serialize(pose)), pose);

    Detection d{g.coin() ? TargetClass::battery_box : TargetClass::wheeled_platform,
                g.word(),
                g.real(0, 1),
                g.real(0, 20),
                g.real(-3, 3),
                "front-left",
                static_cast<Tick>(g.integer(0, 100000))};
    const auto bytes = canonical_serialize(d);
    EXPECT_EQ(canonical_deserialize<Detection>(bytes), d);
    EXPECT_EQ(canonical_serialize(canonical_deserialize<Detection>(bytes)), bytes);

    BatteryState b{g.real(0, 1), g.real(0, 0.01), 0.2, 0.05};
    EXPECT_EQ(canonical_deserialize<BatteryState>(canonical_serialize(b)), b);

    C3Event e;
    e.event_id = static_cast<std::uint64_t>(g.integer(1, 1000));
    e.kind = static_cast<C3Kind>(g.integer(0, 2));
    e.initiator = g.word();
    e.responder = g.word();
    if (g.coin()) e.mission = g.word();
    e.tick = static_cast<Tick>(g.integer(0, 5000));
    e.detail = Json{{"k", g.value(2)}};
    if (g.coin()) e.symbiosis = static_cast<SymbiosisMode>(g.integer(0, 2));
    EXPECT_EQ(canonical_deserialize<C3Event>(canonical_serialize(e)), e);
  }

  MissionInstance m{"M3-1", MissionType::M3, "Grasp", {{0, "Triggered", "t"}, {4, "Grasp", "reached_box"}},
                    {"Q1", "W1"}, "Q1", "W1", {"A1"}};
  EXPECT_EQ(canonical_deserialize<MissionInstance>(canonical_serialize(m)), m);
  CorroborationRequest r{"R-1", "M1-1", Json{{"agent", "Q1"}}, {"A1", "operator"}, 300, "all"};
  EXPECT_EQ(canonical_deserialize<CorroborationRequest>(canonical_serialize(r)), r);
  CorroborationVerdict v{"R-1", "A1", Verdict::denied, 12};
  EXPECT_EQ(canonical_deserialize<CorroborationVerdict>(canonical_serialize(v)), v);
  const auto q = fleet::testing::quadruped();
  EXPECT_EQ(canonical_deserialize<PlatformDescriptor>(canonical_serialize(q)), q);
}

TEST(Pose, HeadingNormalized) {
  EXPECT_DOUBLE_EQ(Pose2D(0, 0, 3 * std::numbers::pi).heading, std::numbers::pi);
  EXPECT_DOUBLE_EQ(Pose2D(0, 0, -std::numbers::pi).heading, std::numbers::pi);
  Gen g(3);
  for (int i = 0; i < 1000; ++i) {
    const double h = Pose2D(0, 0, g.real(-100, 100)).heading;
    EXPECT_GT(h, -std::numbers::pi);
    EXPECT_LE(h, std::numbers::pi);
  }
}

TEST(ValidatePlatform, QuadrupedWithFiveCamerasAndArm) {
  EXPECT_TRUE(validate_platform(fleet::testing::quadruped()).empty());
}

TEST(ValidatePlatform, QuadrupedWithFourCameras) {
  auto q = fleet::testing::quadruped();
  q.cameras.pop_back();
  const auto v = validate_platform(q);
  EXPECT_NE(std::find(v.begin(), v.end(), "camera count"), v.end());
}

TEST(ValidatePlatform, QuadrupedWithoutArm) {
  auto q = fleet::testing::quadruped();
  q.has_manipulator = false;
  const auto v = validate_platform(q);
  EXPECT_NE(std::find(v.begin(), v.end(), "manipulator required"), v.end());
}

TEST(ValidatePlatform, MovingFixedCamera) {
  auto c = fleet::testing::fixed_camera();
  c.max_speed = 1.0;
  const auto v = validate_platform(c);
  EXPECT_NE(std::find(v.begin(), v.end(), "fixed camera immobile"), v.end());
}

TEST(ValidatePlatform, DuplicateIdAgainstRegistry) {
  const auto v = validate_platform(fleet::testing::aerial("A1"), {"A1"});
  EXPECT_NE(std::find(v.begin(), v.end(), "duplicate id"), v.end());
}

TEST(ValidatePlatform, CameraBounds) {
  auto a = fleet::testing::aerial();
  a.cameras[0].fov = 4.0;
  a.cameras[1].max_range = 0.0;
  const auto v = validate_platform(a);
  EXPECT_NE(std::find(v.begin(), v.end(), "camera fov"), v.end());
  EXPECT_NE(std::find(v.begin(), v.end(), "camera range"), v.end());
}

TEST(ValidatePlatform, ReportsEveryViolation) {
  auto q = fleet::testing::quadruped();
  q.cameras.resize(2);
  q.has_manipulator = false;
  EXPECT_GE(validate_platform(q, {"Q1"}).size(), 3u);
}

TEST(Enums, WireTokensRoundTrip) {
  for (auto k : {PlatformKind::quadruped, PlatformKind::wheeled, PlatformKind::aerial, PlatformKind::fixed_camera,
                 PlatformKind::human_operator}) {
    EXPECT_EQ(parse_platform_kind(to_string(k)), k);
  }
  for (auto t : {MissionType::M1, MissionType::M2, MissionType::M3}) EXPECT_EQ(parse_mission_type(to_string(t)), t);
  for (auto v : {Verdict::confirmed, Verdict::denied}) EXPECT_EQ(parse_verdict(to_string(v)), v);
  EXPECT_THROW(parse_c3_kind("symbiosis"), SerializationError);
}
