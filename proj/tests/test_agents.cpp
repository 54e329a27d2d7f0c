#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fleet/agents.hpp"
#include "support.hpp"

using namespace fleet;
using namespace fleet::agents;
using proto::Frame;
using proto::FrameType;
namespace ft = fleet::testing;

namespace {

constexpr double kPi = std::numbers::pi;

/// One controller stepped against the world, with the hub side scripted.
struct Rig {
  sim::WorldState world;
  std::unique_ptr<Controller> ctl;
  proto::FrameWriter hub{"hub"};
  std::vector<Frame> sent;
  std::vector<sim::Command> actuated;

  Output tick(std::vector<Frame> inbox = {}) {
    Output out = ctl->step(world, inbox);
    sent.insert(sent.end(), out.frames.begin(), out.frames.end());
    actuated.insert(actuated.end(), out.actuation.begin(), out.actuation.end());
    world = sim::step(world, out.actuation).world;
    return out;
  }
  void welcome() {
    tick({hub.make(FrameType::WELCOME, ctl->id(), world.tick,
                   Json{{"detection_threshold", 0.6}, {"telemetry_every", 0}})});
  }
  Output command(Json payload) {
    payload["mission_id"] = "m-1";
    return tick({hub.make(FrameType::COMMAND, ctl->id(), world.tick, std::move(payload))});
  }
  std::vector<Frame> of(FrameType t) const {
    std::vector<Frame> out;
    for (const auto& f : sent) {
      if (f.type == t) out.push_back(f);
    }
    return out;
  }
  std::vector<std::string> events() const {
    std::vector<std::string> out;
    for (const auto& f : of(FrameType::MISSION_STATUS)) out.push_back(f.payload.value("event", ""));
    return out;
  }
  bool saw(const std::string& event) const {
    const auto e = events();
    return std::find(e.begin(), e.end(), event) != e.end();
  }
};

Point polar(double r, double a) { return {r * std::cos(a), r * std::sin(a)}; }
Pose2D at(Point p, double heading) { return Pose2D(p.x, p.y, heading); }

Rig quadruped_rig() {
  Rig r;
  r.world.agents["Q1"] = ft::body(ft::quadruped(), Pose2D(0, 0, 0));
  r.ctl = make_quadruped(ft::quadruped());
  r.welcome();
  return r;
}

}  // namespace

TEST(Controller, SilentUntilWelcomed) {
  Rig r;
  r.world.agents["W1"] = ft::body(ft::wheeled(), Pose2D(0, 0, 0), 0.1);
  r.ctl = make_wheeled(ft::wheeled());
  EXPECT_TRUE(r.tick().frames.empty());
  r.welcome();
  EXPECT_EQ(r.of(FrameType::ALERT).size(), 1u);
}

TEST(Controller, HelloCarriesDescriptorAndPose) {
  Rig r;
  r.world.agents["Q1"] = ft::body(ft::quadruped(), Pose2D(1, 2, 0.5));
  r.ctl = make_quadruped(ft::quadruped());
  const Frame h = r.ctl->hello(r.world);
  EXPECT_EQ(h.type, FrameType::HELLO);
  EXPECT_EQ(h.seq, 1u);
  EXPECT_EQ(h.payload["descriptor"].get<PlatformDescriptor>(), ft::quadruped());
  EXPECT_EQ(h.payload["pose"].get<Pose2D>(), Pose2D(1, 2, 0.5));
}

TEST(Controller, ClosedErrorStopsController) {
  auto r = quadruped_rig();
  r.tick({r.hub.make(FrameType::ERROR, "Q1", 0, Json{{"reason", "sequence violation"}, {"closed", true}})});
  EXPECT_TRUE(r.ctl->closed());
  EXPECT_TRUE(r.command(Json{{"verb", "stand"}}).frames.empty());
}

TEST(Controller, OutgoingSequenceIsContiguous) {
  auto r = quadruped_rig();
  r.world.objects["box-1"] = ft::box("box-1", polar(6.0, kPi / 6.0));
  r.command(Json{{"verb", "stand"}});
  r.tick();
  r.command(Json{{"verb", "scan"}, {"target_class", "battery_box"}});
  ASSERT_FALSE(r.sent.empty());
  for (std::size_t i = 0; i < r.sent.size(); ++i) EXPECT_EQ(r.sent[i].seq, i + 1);
}

TEST(Quadruped, CommandsOnlyFromHub) {
  auto r = quadruped_rig();
  proto::FrameWriter op("operator");
  r.tick({op.make(FrameType::COMMAND, "Q1", 0, Json{{"verb", "stand"}, {"mission_id", "m-1"}})});
  EXPECT_TRUE(r.events().empty());
}

TEST(Quadruped, StandReportsMotorsThenStood) {
  auto r = quadruped_rig();
  r.command(Json{{"verb", "stand"}});
  r.tick();
  r.tick();
  EXPECT_EQ(r.events(), (std::vector<std::string>{"motors_on", "stood_up"}));
}

TEST(Quadruped, DetectsBoxOnFrontLeftAxis) {
  auto r = quadruped_rig();
  r.world.objects["box-1"] = ft::box("box-1", polar(0.3 * 20.0, kPi / 6.0));
  r.command(Json{{"verb", "scan"}, {"target_class", "battery_box"}});
  const auto det = r.of(FrameType::DETECTION);
  ASSERT_EQ(det.size(), 1u);
  const auto d = det[0].payload["detection"].get<Detection>();
  EXPECT_EQ(d.target_id, "box-1");
  EXPECT_EQ(d.camera_id, "front-left");
  EXPECT_NEAR(d.confidence, 0.7, 1e-9);
  ASSERT_EQ(r.events(), std::vector<std::string>{"battery_detected"});
  EXPECT_EQ(r.of(FrameType::MISSION_STATUS)[0].payload["detection"]["target_id"], "box-1");
}

TEST(Quadruped, BelowThresholdNotReportedWhileRotating) {
  auto r = quadruped_rig();
  r.world.objects["box-1"] = ft::box("box-1", polar(0.5 * 20.0, kPi / 6.0));
  r.command(Json{{"verb", "scan"}, {"target_class", "battery_box"}});
  for (int i = 0; i < 7; ++i) r.tick();
  EXPECT_TRUE(r.of(FrameType::DETECTION).empty());
  EXPECT_TRUE(r.events().empty());
  int faces = 0;
  for (const auto& c : r.actuated) faces += std::holds_alternative<sim::Face>(c) ? 1 : 0;
  EXPECT_EQ(faces, 8);
  // Eight quarter-pi turns bring the body back to its starting heading.
  EXPECT_NEAR(std::abs(normalize_angle(r.world.agents.at("Q1").pose.heading)), 0.0, 1e-9);
}

TEST(Quadruped, PicksHighestConfidence) {
  auto r = quadruped_rig();
  r.world.objects["box-a"] = ft::box("box-a", polar(20.0 * (1 - 0.65), kPi / 6.0));
  r.world.objects["box-b"] = ft::box("box-b", polar(20.0 * (1 - 0.8), -kPi / 6.0));
  r.command(Json{{"verb", "scan"}, {"target_class", "battery_box"}});
  const auto det = r.of(FrameType::DETECTION);
  ASSERT_EQ(det.size(), 1u);
  EXPECT_EQ(det[0].payload["detection"]["target_id"], "box-b");
  EXPECT_NEAR(det[0].payload["detection"]["confidence"].get<double>(), 0.8, 1e-9);
}

TEST(Quadruped, PartnerScanHonoursTargetId) {
  auto r = quadruped_rig();
  r.world.agents["W2"] = ft::body(ft::wheeled("W2"), at(polar(3.0, kPi / 6.0), 0));
  r.world.agents["W1"] = ft::body(ft::wheeled("W1"), at(polar(5.0, -kPi / 6.0), 0));
  r.command(Json{{"verb", "scan"}, {"target_class", "wheeled_platform"}, {"target_id", "W1"}});
  const auto det = r.of(FrameType::DETECTION);
  ASSERT_EQ(det.size(), 1u);
  EXPECT_EQ(det[0].payload["detection"]["target_id"], "W1");
  EXPECT_EQ(r.events(), std::vector<std::string>{"partner_detected"});
}

namespace {

Point deliver_and_release(Pose2D partner, Pose2D start) {
  Rig r;
  r.world.agents["W1"] = ft::body(ft::wheeled(), partner);
  auto q = ft::body(ft::quadruped(), start);
  q.carrying = "box-1";
  r.world.agents["Q1"] = q;
  auto box = ft::box("box-1", start.position());
  box.carried_by = "Q1";
  r.world.objects["box-1"] = box;
  r.ctl = make_quadruped(ft::quadruped());
  r.welcome();
  r.command(Json{{"verb", "deliver"}, {"partner_id", "W1"}, {"offset", 2.0}});
  for (int i = 0; i < 200 && !r.saw("reached_partner"); ++i) r.tick();
  EXPECT_TRUE(r.saw("reached_partner")) << ::testing::PrintToString(r.events());
  r.command(Json{{"verb", "release"}, {"partner_id", "W1"}});
  r.tick();
  EXPECT_TRUE(r.saw("placed")) << ::testing::PrintToString(r.events());
  const auto& obj = r.world.objects.at("box-1");
  EXPECT_FALSE(obj.carried_by.has_value());
  return obj.pose.position();
}

}  // namespace

TEST(Quadruped, PlacementAlongPartnerHeading) {
  const Point a = deliver_and_release(Pose2D(5, 5, 0), Pose2D(7.5, 6.5, -kPi / 2));
  EXPECT_NEAR(a.x, 7.0, 1e-9);
  EXPECT_NEAR(a.y, 5.0, 1e-9);
  const Point b = deliver_and_release(Pose2D(0, 0, kPi / 2), Pose2D(1.0, 2.5, kPi));
  EXPECT_NEAR(b.x, 0.0, 1e-9);
  EXPECT_NEAR(b.y, 2.0, 1e-9);
}

TEST(Quadruped, ApproachStopsWithinReach) {
  auto r = quadruped_rig();
  r.world.objects["box-1"] = ft::box("box-1", {4.0, 0.0});
  r.command(Json{{"verb", "approach"}, {"target_id", "box-1"}});
  for (int i = 0; i < 100 && !r.saw("reached_box"); ++i) r.tick();
  ASSERT_TRUE(r.saw("reached_box"));
  EXPECT_LE(distance(r.world.agents.at("Q1").pose.position(), {4.0, 0.0}), 0.5 + 1e-9);
  r.command(Json{{"verb", "grasp"}, {"object_id", "box-1"}});
  r.tick();
  EXPECT_TRUE(r.saw("grasp_success"));
  EXPECT_EQ(r.world.agents.at("Q1").carrying, "box-1");
}

TEST(Quadruped, TraceStaysWithinTolerance) {
  auto r = quadruped_rig();
  r.command(Json{{"verb", "trace"}, {"square_side", 1.0}, {"circle_radius", 1.0}, {"samples", 36}});
  for (int i = 0; i < 200 && !r.saw("trace_done") && !r.saw("fault"); ++i) r.tick();
  ASSERT_TRUE(r.saw("trace_done")) << ::testing::PrintToString(r.events());
  const auto done = r.of(FrameType::MISSION_STATUS).back().payload;
  EXPECT_LE(done["max_radial_deviation"].get<double>(), 0.05);
  EXPECT_LE(done["corner_error"].get<double>(), 0.05);
  EXPECT_EQ(done["samples"], 36);
}

TEST(Wheeled, SingleAlertWhenCrossingThreshold) {
  Rig r;
  r.world.agents["W1"] = ft::body(ft::wheeled(), Pose2D(0, 0, 0), 0.21, 0.2);
  r.ctl = make_wheeled(ft::wheeled());
  r.welcome();
  EXPECT_TRUE(r.of(FrameType::ALERT).empty());
  EXPECT_NEAR(r.world.agents.at("W1").battery.level, 0.19, 1e-12);
  for (int i = 0; i < 50; ++i) r.tick();
  const auto alerts = r.of(FrameType::ALERT);
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].payload["kind"], "battery_low");
  EXPECT_NEAR(alerts[0].payload["level"].get<double>(), 0.19, 1e-12);
}

TEST(Wheeled, HaltsAfterAlert) {
  Rig r;
  r.world.agents["W1"] = ft::body(ft::wheeled(), Pose2D(0, 0, 0), 0.15);
  r.ctl = make_wheeled(ft::wheeled(), WheeledParams{{{5, 0}, {5, 5}}});
  r.welcome();
  for (int i = 0; i < 10; ++i) r.tick();
  EXPECT_EQ(r.world.agents.at("W1").pose.position(), (Point{0, 0}));
}

TEST(Wheeled, SwapCompletesAfterSwapTicks) {
  Rig r;
  r.world.agents["W1"] = ft::body(ft::wheeled(), Pose2D(0, 0, 0), 0.19);
  r.world.objects["box-1"] = ft::box("box-1", {2.0, 0.0});
  r.ctl = make_wheeled(ft::wheeled());
  r.welcome();
  const Tick started = 0;
  std::optional<Tick> issued;
  for (int i = 0; i < 400 && !r.saw("swap_complete"); ++i) {
    const Tick at = r.world.tick;
    for (const auto& c : r.tick().actuation) {
      if (std::holds_alternative<sim::SwapBattery>(c)) issued = at;
    }
  }
  ASSERT_TRUE(issued.has_value());
  EXPECT_EQ(*issued - started, 300u);
  ASSERT_TRUE(r.saw("swap_complete"));
  EXPECT_DOUBLE_EQ(r.world.agents.at("W1").battery.level, 1.0);
  EXPECT_FALSE(r.world.objects.contains("box-1"));
}

namespace {

Rig observer_rig(std::unique_ptr<Controller> ctl, PlatformDescriptor d, Point target) {
  Rig r;
  r.world.agents[d.agent_id] = ft::body(d, Pose2D(0, 0, 0));
  r.world.agents["Q1"] = ft::body(ft::quadruped(), at(target, 0));
  r.ctl = std::move(ctl);
  r.welcome();
  return r;
}

Json corr_request(Tick deadline) {
  return Json{{"request_id", "c-1"}, {"subject", {{"agent", "Q1"}}}, {"deadline_tick", deadline}};
}

}  // namespace

TEST(Aerial, ConfirmsVisibleSubject) {
  auto r = observer_rig(make_aerial(ft::aerial()), ft::aerial(), {3.0, 0.0});
  r.tick({r.hub.make(FrameType::CORR_REQUEST, "A1", r.world.tick, corr_request(100))});
  for (int i = 0; i < 5; ++i) r.tick();
  const auto v = r.of(FrameType::CORR_VERDICT);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].payload["verdict"], "confirmed");
  EXPECT_EQ(v[0].payload["request_id"], "c-1");
}

TEST(Aerial, DeniesSubjectBehindFrontOnlyCamera) {
  auto d = ft::aerial();
  d.cameras = {{"front", 0.0, kPi, 15.0}};
  auto r = observer_rig(make_aerial(d), d, {-3.0, 0.0});
  r.tick({r.hub.make(FrameType::CORR_REQUEST, "A1", r.world.tick, corr_request(100))});
  for (int i = 0; i < 5; ++i) r.tick();
  const auto v = r.of(FrameType::CORR_VERDICT);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].payload["verdict"], "denied");
}

TEST(Aerial, LateVerdictDropped) {
  auto r = observer_rig(make_aerial(ft::aerial()), ft::aerial(), {3.0, 0.0});
  r.tick({r.hub.make(FrameType::CORR_REQUEST, "A1", r.world.tick, corr_request(r.world.tick + 1))});
  for (int i = 0; i < 10; ++i) r.tick();
  EXPECT_TRUE(r.of(FrameType::CORR_VERDICT).empty());
}

TEST(Aerial, FollowsBehindTarget) {
  auto r = observer_rig(make_aerial(ft::aerial()), ft::aerial(), {6.0, 0.0});
  proto::FrameWriter op("operator");
  r.tick({op.make(FrameType::COMMAND, "A1", 0, Json{{"verb", "follow"}, {"target", "Q1"}})});
  for (int i = 0; i < 50; ++i) r.tick();
  EXPECT_NEAR(distance(r.world.agents.at("A1").pose.position(), {3.0, 0.0}), 0.0, 0.05);
}

TEST(FixedCamera, AnswersAndReportsDetections) {
  auto r = observer_rig(make_fixed_camera(ft::fixed_camera()), ft::fixed_camera(), {3.0, 0.0});
  r.world.objects["box-1"] = ft::box("box-1", {4.0, 1.0});
  r.tick({r.hub.make(FrameType::CORR_REQUEST, "CAM1", r.world.tick, corr_request(100))});
  for (int i = 0; i < 5; ++i) r.tick();
  const auto v = r.of(FrameType::CORR_VERDICT);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].payload["verdict"], "confirmed");
  // Each target is reported once while it stays in view.
  std::set<std::string> seen;
  for (const auto& f : r.of(FrameType::DETECTION)) {
    EXPECT_TRUE(seen.insert(f.payload["detection"]["target_id"].get<std::string>()).second);
  }
  EXPECT_TRUE(seen.contains("box-1"));
}

namespace {

struct OperatorRig {
  Rig rig;
  ScriptedOperator* op = nullptr;

  explicit OperatorRig(OperatorParams p) {
    auto o = std::make_unique<ScriptedOperator>(ft::human(), std::move(p));
    op = o.get();
    rig.ctl = std::move(o);
    rig.welcome();
  }
};

}  // namespace

TEST(Operator, TriggersOnSchedule) {
  OperatorParams p;
  p.schedule.push_back({MissionType::M1, Tick{5}, std::nullopt, Json::object()});
  OperatorRig o(p);
  for (int i = 0; i < 4; ++i) o.rig.tick();
  EXPECT_TRUE(o.rig.of(FrameType::MISSION_TRIGGER).empty());
  o.rig.tick();
  const auto t = o.rig.of(FrameType::MISSION_TRIGGER);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].payload["mission_type"], "M1");
  EXPECT_EQ(t[0].tick, 5u);
}

TEST(Operator, RetriesBusyExecutorAndSettles) {
  OperatorParams p;
  p.retry_delay = 20;
  p.schedule.push_back({MissionType::M2, std::nullopt, std::nullopt, Json::object()});
  OperatorRig o(p);
  ASSERT_EQ(o.rig.of(FrameType::MISSION_TRIGGER).size(), 1u);
  o.rig.tick({o.rig.hub.make(FrameType::ERROR, "operator", o.rig.world.tick,
                             Json{{"reason", "executor busy"}, {"mission_type", "M2"}})});
  for (int i = 0; i < 19; ++i) o.rig.tick();
  EXPECT_EQ(o.rig.of(FrameType::MISSION_TRIGGER).size(), 1u);
  for (int i = 0; i < 2; ++i) o.rig.tick();
  EXPECT_EQ(o.rig.of(FrameType::MISSION_TRIGGER).size(), 2u);
  EXPECT_FALSE(o.op->schedule_settled());
  o.rig.tick({o.rig.hub.make(FrameType::MISSION_STATUS, "*", o.rig.world.tick,
                             Json{{"mission_id", "m-7"}, {"mission_type", "M2"}, {"event", "trigger"},
                                  {"state", "Triggered"}, {"executor", "Q1"}})});
  o.rig.tick({o.rig.hub.make(FrameType::MISSION_STATUS, "*", o.rig.world.tick,
                             Json{{"mission_id", "m-7"}, {"mission_type", "M2"}, {"event", "timeout"},
                                  {"state", "Unverified"}, {"executor", "Q1"}})});
  EXPECT_TRUE(o.op->schedule_settled());
}

TEST(Operator, ApprovesFeasibleProposalAfterDelay) {
  OperatorParams p;
  p.approve_delay = 20;
  OperatorRig o(p);
  const Tick at = o.rig.world.tick;
  o.rig.tick({o.rig.hub.make(FrameType::EVENT, "*", at,
                             Json{{"proposal", {{"proposal_id", "p-1"}, {"status", "pending"}, {"feasible", true}}}})});
  for (int i = 0; i < 25; ++i) o.rig.tick();
  const auto t = o.rig.of(FrameType::MISSION_TRIGGER);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].payload["proposal_id"], "p-1");
  EXPECT_EQ(t[0].tick, at + 20);
}

TEST(Operator, IgnoresInfeasibleProposal) {
  OperatorRig o(OperatorParams{});
  o.rig.tick({o.rig.hub.make(FrameType::EVENT, "*", 0,
                             Json{{"proposal", {{"proposal_id", "p-1"}, {"status", "pending"}, {"feasible", false}}}})});
  for (int i = 0; i < 40; ++i) o.rig.tick();
  EXPECT_TRUE(o.rig.of(FrameType::MISSION_TRIGGER).empty());
}

TEST(Operator, VerdictPolicy) {
  for (const std::string policy : {"confirm", "deny", "ignore"}) {
    OperatorParams p;
    p.verdict = policy;
    p.steer_aerial = false;
    OperatorRig o(p);
    o.rig.tick({o.rig.hub.make(FrameType::CORR_REQUEST, "operator", 0, corr_request(100))});
    for (int i = 0; i < 15; ++i) o.rig.tick();
    const auto v = o.rig.of(FrameType::CORR_VERDICT);
    if (policy == "ignore") {
      EXPECT_TRUE(v.empty());
    } else {
      ASSERT_EQ(v.size(), 1u) << policy;
      EXPECT_EQ(v[0].payload["verdict"], policy == "deny" ? "denied" : "confirmed");
    }
  }
}
