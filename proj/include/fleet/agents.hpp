#pragma once
// Per-platform controllers. Each one reads a const world snapshot plus the
// frames delivered to it since its last step, and answers with outgoing
// frames and actuation for the next world step.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fleet/protocol.hpp"
#include "fleet/world.hpp"

namespace fleet::agents {

struct Output {
  std::vector<proto::Frame> frames;
  std::vector<sim::Command> actuation;
};

class Controller {
 public:
  explicit Controller(PlatformDescriptor descriptor);
  virtual ~Controller() = default;

  const std::string& id() const { return descriptor_.agent_id; }
  const PlatformDescriptor& descriptor() const { return descriptor_; }
  /// HELLO carrying the descriptor and, for embodied agents, pose and battery.
  proto::Frame hello(const sim::WorldState& world);
  Output step(const sim::WorldState& world, const std::vector<proto::Frame>& inbox);
  bool closed() const { return closed_; }

 protected:
  virtual void on_frame(const sim::WorldState& world, const proto::Frame& f, Output& out) = 0;
  virtual void on_tick(const sim::WorldState& world, Output& out) = 0;
  virtual Json telemetry(const sim::WorldState& world);

  void send(Output& out, const sim::WorldState& world, proto::FrameType type, const std::string& dst,
            Json payload);
  void status(Output& out, const sim::WorldState& world, const std::string& mission_id, const std::string& event,
              Json evidence = Json::object());
  const sim::AgentBody* body(const sim::WorldState& world) const { return world.find_agent(id()); }

  PlatformDescriptor descriptor_;
  proto::FrameWriter writer_;
  Tick telemetry_every_ = 5;
  double detection_threshold_ = kDefaultDetectionThreshold;
  bool welcomed_ = false;
  bool closed_ = false;
};

struct QuadrupedParams {
  std::string search_pattern = "rotate_then_lawnmower";  // or "rotate"
  double lawnmower_spacing = 6.0;
  double approach_stop = 0.5;
  double partner_move_tolerance = 0.5;
  Tick partner_lost_ticks = 20;
  double trace_tolerance = 0.05;
};

struct WheeledParams {
  std::vector<Point> patrol;
  double speed_fraction = 1.0;
  Tick swap_ticks = 300;
};

struct AerialParams {
  double follow_distance = 3.0;
  Tick verdict_delay = 3;
};

struct FixedCameraParams {
  Tick verdict_delay = 3;
};

struct ScheduleEntry {
  MissionType type = MissionType::M1;
  std::optional<Tick> at_tick;
  std::optional<std::size_t> after;  // index of the entry that must finish first
  Json params = Json::object();
};

struct OperatorParams {
  std::vector<ScheduleEntry> schedule;
  bool approve_proposals = true;
  Tick approve_delay = 20;
  std::string verdict = "confirm";  // confirm | deny | ignore
  Tick verdict_delay = 10;
  Tick retry_delay = 20;
  bool steer_aerial = true;
};

std::unique_ptr<Controller> make_quadruped(PlatformDescriptor d, QuadrupedParams p = {});
std::unique_ptr<Controller> make_wheeled(PlatformDescriptor d, WheeledParams p = {});
std::unique_ptr<Controller> make_aerial(PlatformDescriptor d, AerialParams p = {});
std::unique_ptr<Controller> make_fixed_camera(PlatformDescriptor d, FixedCameraParams p = {});

/// Scripted stand-in for the human operator in headless runs.
class ScriptedOperator : public Controller {
 public:
  ScriptedOperator(PlatformDescriptor d, OperatorParams p);

  enum class EntryState { waiting, sent, running, finished, rejected };
  struct EntryStatus {
    EntryState state = EntryState::waiting;
    std::optional<std::string> mission_id;
    std::optional<std::string> reason;
    Tick not_before = 0;
  };
  const std::vector<EntryStatus>& entries() const { return status_; }
  /// True once every schedule entry has finished or been rejected for good.
  bool schedule_settled() const;

 protected:
  void on_frame(const sim::WorldState& world, const proto::Frame& f, Output& out) override;
  void on_tick(const sim::WorldState& world, Output& out) override;
  Json telemetry(const sim::WorldState& world) override;

 private:
  struct Pending {
    Tick due = 0;
    proto::FrameType type = proto::FrameType::COMMAND;
    std::string dst;
    Json payload;
  };
  void steer(const sim::WorldState& world, Output& out);

  OperatorParams params_;
  std::vector<EntryStatus> status_;
  std::vector<Pending> pending_;
  std::map<std::string, std::string> active_;  // mission id -> executor
  std::optional<std::string> following_;
};

}  // namespace fleet::agents
