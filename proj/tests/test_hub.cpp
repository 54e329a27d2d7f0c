#include <gtest/gtest.h>

#include "fleet/canonical.hpp"
#include "fleet/error.hpp"
#include "fleet/hub.hpp"
#include "fleet/runner.hpp"
#include "support.hpp"

using namespace fleet;
using namespace fleet::hub;
using proto::Frame;
using proto::FrameType;
namespace ft = fleet::testing;

namespace {

struct Client {
  ConnectionId conn = 0;
  std::vector<Frame> inbox;
  proto::FrameWriter writer{"?"};

  std::vector<Frame> of(FrameType t) const {
    std::vector<Frame> out;
    for (const auto& f : inbox) {
      if (f.type == t) out.push_back(f);
    }
    return out;
  }
};

class HubTest : public ::testing::Test {
 protected:
  EventLog log;
  std::unique_ptr<Hub> hub;
  std::map<std::string, std::unique_ptr<Client>> clients;

  void SetUp() override {
    sim::WorldState w;
    w.agents["Q1"] = ft::body(ft::quadruped(), Pose2D(0, 0, 0));
    w.agents["W1"] = ft::body(ft::wheeled(), Pose2D(5, 0, 0));
    w.agents["A1"] = ft::body(ft::aerial(), Pose2D(-2, -2, 0));
    hub = std::make_unique<Hub>(HubConfig{}, w, log);
  }

  Client& join(const PlatformDescriptor& d) {
    auto c = std::make_unique<Client>();
    Client* raw = c.get();
    c->writer = proto::FrameWriter(d.agent_id);
    c->conn = hub->connect([raw](const Frame& f) { raw->inbox.push_back(f); });
    hub->receive(c->conn, c->writer.make(FrameType::HELLO, "hub", hub->tick(), Json{{"descriptor", d}}));
    clients[d.agent_id] = std::move(c);
    return *raw;
  }

  RouteResult send(Client& c, FrameType t, const std::string& dst, Json payload) {
    return hub->route(c.conn, c.writer.make(t, dst, hub->tick(), std::move(payload)));
  }
};

}  // namespace

TEST(Codec, CanonicalFrameBytes) {
  Frame f{1, FrameType::TELEMETRY, 3, 10, "W1", "hub", Json{{"b", 1}, {"a", 2}}};
  EXPECT_EQ(proto::encode_frame(f),
            R"({"dst":"hub","payload":{"a":2,"b":1},"seq":3,"src":"W1","tick":10,"type":"TELEMETRY","v":1})");
  EXPECT_EQ(proto::decode_frame(proto::encode_frame(f) + "\n"), f);
}

TEST(Codec, StrictDecoding) {
  const std::string good = R"({"dst":"hub","payload":{},"seq":1,"src":"W1","tick":0,"type":"BYE","v":1})";
  EXPECT_NO_THROW(proto::decode_frame(good));
  EXPECT_THROW(proto::decode_frame(R"({"dst":"hub","payload":{},"seq":1,"src":"W1","tick":0,"type":"BYE","v":2})"),
               ProtocolError);
  EXPECT_THROW(proto::decode_frame(R"({"dst":"hub","payload":{},"seq":0,"src":"W1","tick":0,"type":"BYE","v":1})"),
               ProtocolError);
  EXPECT_THROW(proto::decode_frame(R"({"dst":"hub","payload":{},"seq":1,"src":"W1","tick":0,"type":"PING","v":1})"),
               ProtocolError);
  EXPECT_THROW(
      proto::decode_frame(R"({"dst":"hub","extra":1,"payload":{},"seq":1,"src":"W1","tick":0,"type":"BYE","v":1})"),
      ProtocolError);
  EXPECT_THROW(proto::decode_frame(R"({"dst":"hub","payload":[],"seq":1,"src":"W1","tick":0,"type":"BYE","v":1})"),
               ProtocolError);
  EXPECT_THROW(proto::decode_frame("not json"), ProtocolError);
}

TEST(Codec, GeneratedFramesRoundTripByteIdentically) {
  ft::Gen g(1234);
  for (int i = 0; i < 10000; ++i) {
    const Frame f = g.frame();
    const std::string bytes = proto::encode_frame(f);
    const Frame back = proto::decode_frame(bytes);
    ASSERT_EQ(proto::encode_frame(back), bytes);
    ASSERT_EQ(back, f);
  }
}

TEST(Log, OffsetsAndHash) {
  EventLog log;
  EXPECT_EQ(log.append(Json{{"a", 1}}), 0u);
  EXPECT_EQ(log.append(Json{{"b", 2}}), 1u);
  EXPECT_EQ(log.lines()[0], R"({"a":1})");
  EXPECT_EQ(log.digest(), sha256_hex("{\"a\":1}\n{\"b\":2}\n"));
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Log, SideCarDigestWritten) {
  const auto dir = ft::scratch_dir("hub-log");
  const std::string path = (dir / "x.jsonl").string();
  {
    EventLog log(path);
    log.append(Json{{"a", 1}});
    log.finalize();
    EXPECT_EQ(read_lines(digest_path(path)).at(0), log.digest());
  }
  EXPECT_EQ(read_lines(path), std::vector<std::string>{R"({"a":1})"});
}

TEST(Log, UnwritablePathThrows) { EXPECT_THROW(EventLog("/nonexistent-dir/x/y.jsonl"), Error); }

TEST_F(HubTest, FirstRecordIsConfig) {
  const Frame f = proto::decode_frame(log.lines().at(0));
  EXPECT_EQ(f.type, FrameType::EVENT);
  EXPECT_TRUE(f.payload.contains("config"));
  EXPECT_EQ(f.payload["config"]["tick_dt"], 0.1);
}

TEST_F(HubTest, ValidQuadrupedWelcomed) {
  auto& q = join(ft::quadruped());
  ASSERT_EQ(q.inbox.size(), 1u);
  EXPECT_EQ(q.inbox[0].type, FrameType::WELCOME);
  EXPECT_EQ(q.inbox[0].payload["detection_threshold"], 0.6);
  EXPECT_TRUE(hub->sessions().contains("Q1"));
}

TEST_F(HubTest, DuplicateIdRefused) {
  join(ft::quadruped());
  auto& again = join(ft::quadruped());
  ASSERT_EQ(again.inbox.size(), 1u);
  EXPECT_EQ(again.inbox[0].type, FrameType::ERROR);
  EXPECT_EQ(again.inbox[0].payload["reason"], "duplicate id");
  EXPECT_FALSE(hub->is_open(again.conn));
  EXPECT_EQ(hub->sessions().size(), 1u);
}

TEST_F(HubTest, FourCameraQuadrupedRefused) {
  auto d = ft::quadruped();
  d.cameras.pop_back();
  auto& q = join(d);
  ASSERT_EQ(q.inbox.size(), 1u);
  EXPECT_EQ(q.inbox[0].type, FrameType::ERROR);
  EXPECT_EQ(q.inbox[0].payload["reason"], "invalid descriptor");
  bool found = false;
  for (const auto& v : q.inbox[0].payload["violations"]) {
    found = found || v.get<std::string>().find("camera count") != std::string::npos;
  }
  EXPECT_TRUE(found);
}

TEST_F(HubTest, FrameBeforeHelloRefused) {
  Client c;
  const ConnectionId conn = hub->connect([&](const Frame& f) { c.inbox.push_back(f); });
  proto::FrameWriter w("W1");
  hub->receive(conn, w.make(FrameType::TELEMETRY, "hub", 0));
  ASSERT_EQ(c.inbox.size(), 1u);
  EXPECT_EQ(c.inbox[0].type, FrameType::ERROR);
  EXPECT_FALSE(hub->is_open(conn));
}

TEST_F(HubTest, TelemetryLoggedAndInSnapshot) {
  auto& w = join(ft::wheeled());
  const auto before = log.size();
  const auto r = send(w, FrameType::TELEMETRY, "hub", Json{{"battery", {{"level", 0.5}}}});
  EXPECT_EQ(r.delivered_to, std::vector<std::string>{"hub"});
  EXPECT_EQ(log.size(), before + 1);
  EXPECT_EQ(proto::decode_frame(log.lines().back()).src, "W1");
  EXPECT_EQ(hub->snapshot().telemetry.at("W1")["battery"]["level"], 0.5);
}

TEST_F(HubTest, SequenceGapClosesSession) {
  auto& w = join(ft::wheeled());
  for (int i = 0; i < 3; ++i) send(w, FrameType::TELEMETRY, "hub", {});  // seq 2..4
  send(w, FrameType::TELEMETRY, "hub", {});                               // seq 5
  w.writer.make(FrameType::TELEMETRY, "hub", 0);                          // seq 6 never sent
  const auto r = send(w, FrameType::TELEMETRY, "hub", {});                // seq 7
  EXPECT_TRUE(r.session_closed);
  EXPECT_EQ(r.error, "sequence violation");
  const auto errors = w.of(FrameType::ERROR);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].payload["reason"], "sequence violation");
  EXPECT_EQ(errors[0].payload["closed"], true);
  EXPECT_FALSE(hub->is_open(w.conn));
  EXPECT_FALSE(hub->sessions().contains("W1"));
}

TEST_F(HubTest, BroadcastReachesEveryoneButSender) {
  auto& q = join(ft::quadruped());
  auto& a = join(ft::aerial());
  auto& op = join(ft::human());
  const auto r = send(q, FrameType::MISSION_STATUS, "*", Json{{"event", "note"}});
  std::set<std::string> got(r.delivered_to.begin(), r.delivered_to.end());
  std::set<std::string> want;
  for (const auto& [id, s] : hub->sessions()) {
    if (id != "Q1") want.insert(id);
  }
  EXPECT_EQ(got, want);
  EXPECT_EQ(got, (std::set<std::string>{"A1", "operator"}));
  EXPECT_EQ(a.of(FrameType::MISSION_STATUS).size(), 1u);
  EXPECT_EQ(op.of(FrameType::MISSION_STATUS).size(), 1u);
  EXPECT_TRUE(q.of(FrameType::MISSION_STATUS).empty());
}

TEST_F(HubTest, UnknownDestinationErrorsToSender) {
  auto& q = join(ft::quadruped());
  const auto r = send(q, FrameType::COMMAND, "Z9", Json{{"verb", "hold"}});
  EXPECT_EQ(r.error, "unknown destination");
  EXPECT_FALSE(r.session_closed);
  ASSERT_EQ(q.of(FrameType::ERROR).size(), 1u);
  EXPECT_TRUE(hub->is_open(q.conn));
}

TEST_F(HubTest, MalformedLineClosesSession) {
  auto& q = join(ft::quadruped());
  hub->receive_line(q.conn, "{broken");
  EXPECT_FALSE(hub->is_open(q.conn));
  EXPECT_EQ(q.of(FrameType::ERROR).size(), 1u);
}

TEST_F(HubTest, OperatorTriggerCommandsExecutor) {
  auto& q = join(ft::quadruped());
  join(ft::aerial());
  auto& op = join(ft::human());
  send(op, FrameType::MISSION_TRIGGER, "hub", Json{{"mission_type", "M1"}});
  const auto statuses = op.of(FrameType::MISSION_STATUS);
  ASSERT_EQ(statuses.size(), 1u);
  EXPECT_EQ(statuses[0].payload["state"], "Triggered");
  EXPECT_EQ(statuses[0].payload["event"], "trigger");
  const auto cmds = q.of(FrameType::COMMAND);
  ASSERT_EQ(cmds.size(), 1u);
  EXPECT_EQ(cmds[0].payload["verb"], "stand");
}

TEST_F(HubTest, RejectedTriggerReported) {
  join(ft::quadruped());
  auto& op = join(ft::human());
  send(op, FrameType::MISSION_TRIGGER, "hub", Json{{"mission_type", "M3"}});
  const auto errors = op.of(FrameType::ERROR);
  ASSERT_EQ(errors.size(), 1u);
  EXPECT_EQ(errors[0].payload["reason"], "missing beneficiary");
  EXPECT_EQ(errors[0].payload["mission_type"], "M3");
}

TEST_F(HubTest, ForgedDetectionClaimFailsGate) {
  join(ft::quadruped());
  join(ft::wheeled());
  auto& op = join(ft::human());
  auto& q = *clients.at("Q1");
  send(op, FrameType::MISSION_TRIGGER, "hub", Json{{"mission_type", "M3"}, {"params", {{"beneficiary", "W1"}}}});
  ASSERT_EQ(hub->governance().missions().size(), 1u);
  const std::string id = hub->governance().missions().begin()->first;
  // The claim rides in the status only; the hub has seen no DETECTION frame.
  Json claim{{"target_class", "battery_box"}, {"target_id", "box-1"}, {"confidence", 0.99}};
  send(q, FrameType::MISSION_STATUS, "hub", Json{{"event", "battery_detected"}, {"mission_id", id}, {"detection", claim}});
  EXPECT_EQ(hub->governance().find_mission(id)->state, "SearchBattery");
  Detection low{TargetClass::battery_box, "box-1", 0.5, 10.0, 0.0, "front-left", 0};
  send(q, FrameType::DETECTION, "hub", Json{{"detection", low}});
  send(q, FrameType::MISSION_STATUS, "hub", Json{{"event", "battery_detected"}, {"mission_id", id}});
  EXPECT_EQ(hub->governance().find_mission(id)->state, "SearchBattery");
  Detection good{TargetClass::battery_box, "box-1", 0.7, 6.0, 0.0, "front-left", 0};
  send(q, FrameType::DETECTION, "hub", Json{{"detection", good}});
  send(q, FrameType::MISSION_STATUS, "hub", Json{{"event", "battery_detected"}, {"mission_id", id}});
  EXPECT_EQ(hub->governance().find_mission(id)->state, "ApproachBox");
}

TEST_F(HubTest, HeartbeatTimeoutClosesSession) {
  join(ft::wheeled());
  for (int i = 0; i < 601; ++i) hub->step_world({});
  hub->end_tick();
  EXPECT_FALSE(hub->sessions().contains("W1"));
}

TEST_F(HubTest, FreshSnapshotAndConsistency) {
  EventLog empty_log;
  Hub bare(HubConfig{}, sim::WorldState{}, empty_log);
  const auto s = bare.snapshot();
  EXPECT_EQ(s.tick, 0u);
  EXPECT_TRUE(s.sessions.empty());
  EXPECT_TRUE(s.missions.empty());
  EXPECT_TRUE(s.world.agents.empty());
  join(ft::quadruped());
  EXPECT_EQ(canonical_serialize(snapshot_to_json(hub->snapshot())),
            canonical_serialize(snapshot_to_json(hub->snapshot())));
}

TEST_F(HubTest, ShutdownBroadcastsBye) {
  auto& q = join(ft::quadruped());
  hub->shutdown("done");
  EXPECT_EQ(q.of(FrameType::BYE).size(), 1u);
  EXPECT_EQ(proto::decode_frame(log.lines().back()).type, FrameType::BYE);
}

namespace {

Simulation bundled(const std::string& name, EventLog& log) {
  const auto s = load_scenario(ft::source_path("scenarios/" + name + ".json"));
  return Simulation(s, s.seed.value_or(0), log);
}

}  // namespace

TEST(HubRun, SnapshotShowsCarriedBoxDuringApproachPartner) {
  EventLog log;
  auto sim = bundled("m3_battery", log);
  bool seen = false;
  for (int i = 0; i < 3000 && !sim.done() && !seen; ++i) {
    sim.tick();
    const auto snap = sim.hub().snapshot();
    for (const auto& m : snap.missions) {
      if (m.state != "ApproachPartner") continue;
      seen = true;
      EXPECT_EQ(snap.world.agents.at(m.executor).carrying, "box-1");
      EXPECT_EQ(snap.world.objects.at("box-1").carried_by, m.executor);
    }
  }
  EXPECT_TRUE(seen);
}

TEST(HubRun, M1RunIsBidirectional) {
  EventLog log;
  auto sim = bundled("m1_systems_check", log);
  const auto agents = sim.scenario().agents;
  while (!sim.done() && sim.hub().tick() < 5000) sim.tick();
  sim.shutdown("done");
  std::set<std::string> commanded, reporting;
  for (const auto& line : log.lines()) {
    const Frame f = proto::decode_frame(line);
    if (f.type == FrameType::COMMAND) commanded.insert(f.dst);
    if (f.type == FrameType::TELEMETRY && f.dst == "hub") reporting.insert(f.src);
  }
  for (const auto& a : agents) {
    const auto& id = a.descriptor.agent_id;
    EXPECT_TRUE(reporting.contains(id)) << id << " never sent TELEMETRY";
    if (a.descriptor.kind != PlatformKind::human_operator) {
      EXPECT_TRUE(commanded.contains(id)) << id << " never received a COMMAND";
    }
  }
}
