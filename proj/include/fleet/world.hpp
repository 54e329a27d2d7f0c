#pragma once
// Discrete-tick planar world: kinematics, battery drain, carried objects,
// a line-of-sight perception oracle and a corner-detour path planner.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fleet/model.hpp"

namespace fleet::sim {

struct AgentBody {
  PlatformDescriptor descriptor;
  Pose2D pose;
  BatteryState battery;
  std::optional<std::string> carrying;

  friend bool operator==(const AgentBody&, const AgentBody&) = default;
};

struct WorldObject {
  std::string object_id;
  TargetClass object_class = TargetClass::battery_box;
  Pose2D pose;
  std::optional<std::string> carried_by;

  friend bool operator==(const WorldObject&, const WorldObject&) = default;
};

struct WorldParams {
  double grasp_reach = 0.8;
  double swap_radius = 2.5;
  double agent_radius = 0.4;
  double perception_jitter = 0.0;  // half-width of seeded confidence noise; 0 disables

  friend bool operator==(const WorldParams&, const WorldParams&) = default;
};

struct WorldState {
  Tick tick = 0;
  double tick_dt = 0.1;
  Rect bounds{{-50.0, -50.0}, {50.0, 50.0}};
  std::map<std::string, AgentBody> agents;
  std::map<std::string, WorldObject> objects;
  std::vector<Rect> obstacles;
  std::uint64_t rng_seed = 0;
  WorldParams params;

  const AgentBody* find_agent(const std::string& id) const;
  const WorldObject* find_object(const std::string& id) const;
  friend bool operator==(const WorldState&, const WorldState&) = default;
};

// Actuation requests consumed by step(). Motion verbs are bounded by
// max_speed * tick_dt and ignored while the agent is immobilized.
struct Forward {
  std::string agent_id;
  double speed_fraction = 1.0;
};
struct MoveTo {
  std::string agent_id;
  Point target;
};
struct Face {
  std::string agent_id;
  double heading = 0.0;
};
struct Grasp {
  std::string agent_id;
  std::string object_id;
};
struct Release {
  std::string agent_id;
  Point at;
};
struct SwapBattery {
  std::string agent_id;
  std::string object_id;
};
/// Twin synchronisation from a remote agent's telemetry.
struct SyncPose {
  std::string agent_id;
  Pose2D pose;
};

using Command = std::variant<Forward, MoveTo, Face, Grasp, Release, SwapBattery, SyncPose>;

const std::string& command_agent(const Command& c);

struct CommandError {
  std::size_t index = 0;
  std::string agent_id;
  std::string message;
};

struct StepResult {
  WorldState world;
  std::vector<CommandError> errors;
};

/// Advances one tick. Rejected commands are reported; the world still advances.
StepResult step(const WorldState& world, const std::vector<Command>& commands);

struct Sighting {
  double range = 0.0;
  double bearing = 0.0;  // relative to body heading
};

/// Line-of-sight test from one camera of `observer` to `target`.
std::optional<Sighting> sight(const WorldState& world, const AgentBody& observer,
                              const CameraSpec& camera, Point target);

/// True when any camera of `observer_id` sees `target`.
bool can_see(const WorldState& world, const std::string& observer_id, Point target);

/// Detections of battery boxes and wheeled platforms from one camera, ordered
/// by confidence (desc), range (asc), target id. Throws PerceptionError for
/// an unknown agent or camera.
std::vector<Detection> perceive(const WorldState& world, const std::string& agent_id,
                                const std::string& camera_id);

/// Confidence model of the perception oracle: clamp(1 - range / max_range, 0, 1).
double detection_confidence(double range, double max_range);

/// Waypoints from `from` to `to` (start excluded, target included). Throws
/// NoPathError when the target sits inside an obstacle or is unreachable.
std::vector<Point> plan_path(const WorldState& world, const Pose2D& from, Point to);

/// `n_samples` equally spaced points on the circle, starting at angle 0.
std::vector<Point> trace_circle(Point center, double radius, int n_samples);

/// Four corners of a square walked counter-clockwise from `origin`, ending on it.
std::vector<Point> trace_square(const Pose2D& origin, double side);

void to_json(Json& j, const AgentBody& v);
void from_json(const Json& j, AgentBody& v);
void to_json(Json& j, const WorldObject& v);
void from_json(const Json& j, WorldObject& v);
void to_json(Json& j, const WorldState& v);
void from_json(const Json& j, WorldState& v);

}  // namespace fleet::sim
