#pragma once
// Domain types shared by the simulator, the governance engine and the hub.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fleet/geometry.hpp"

namespace fleet {

using Json = nlohmann::json;
using Tick = std::uint64_t;

inline constexpr double kDefaultDetectionThreshold = 0.60;

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // (-pi, pi]

  Pose2D() = default;
  Pose2D(double x_, double y_, double heading_)
      : x(x_), y(y_), heading(normalize_angle(heading_)) {}

  Point position() const { return {x, y}; }
  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

enum class PlatformKind { quadruped, wheeled, aerial, fixed_camera, human_operator };

struct CameraSpec {
  std::string camera_id;
  double mount_bearing = 0.0;  // relative to body heading
  double fov = 0.0;
  double max_range = 0.0;

  friend bool operator==(const CameraSpec&, const CameraSpec&) = default;
};

struct PlatformDescriptor {
  std::string agent_id;
  PlatformKind kind = PlatformKind::wheeled;
  std::vector<CameraSpec> cameras;
  bool has_manipulator = false;
  bool battery_capable = false;
  double max_speed = 0.0;

  const CameraSpec* find_camera(std::string_view id) const;
  friend bool operator==(const PlatformDescriptor&, const PlatformDescriptor&) = default;
};

struct BatteryState {
  double level = 1.0;
  double drain_rate = 0.0;  // fraction per simulated second
  double alert_threshold = 0.20;
  double immobilize_threshold = 0.05;

  bool immobilized() const { return level <= immobilize_threshold; }
  friend bool operator==(const BatteryState&, const BatteryState&) = default;
};

enum class TargetClass { battery_box, wheeled_platform };

struct Detection {
  TargetClass target_class = TargetClass::battery_box;
  std::string target_id;
  double confidence = 0.0;
  double range = 0.0;
  double bearing = 0.0;  // relative to body heading
  std::string camera_id;
  Tick tick = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

enum class C3Kind { cooperation, collaboration, corroboration };
enum class InteractionPattern { joint_task_step, assistance_on_fault, independent_verification };
enum class SymbiosisMode { mutualism, commensalism, parasitism };

struct C3Event {
  std::uint64_t event_id = 0;
  C3Kind kind = C3Kind::cooperation;
  std::string initiator;
  std::string responder;  // agent id, "hub" or "operator"
  std::optional<std::string> mission;
  Tick tick = 0;
  Json detail = Json::object();
  std::optional<SymbiosisMode> symbiosis;  // left unset unless a scenario annotates it

  friend bool operator==(const C3Event&, const C3Event&) = default;
};

enum class MissionType { M1, M2, M3 };

struct HistoryEntry {
  Tick tick = 0;
  std::string state;
  std::string cause;

  friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

struct MissionInstance {
  std::string mission_id;
  MissionType mission_type = MissionType::M1;
  std::string state;
  std::vector<HistoryEntry> history;
  std::vector<std::string> participants;
  std::string executor;
  std::optional<std::string> beneficiary;
  std::vector<std::string> corroborators;

  friend bool operator==(const MissionInstance&, const MissionInstance&) = default;
};

enum class Verdict { confirmed, denied };

struct CorroborationRequest {
  std::string request_id;
  std::string mission_id;
  Json subject = Json::object();  // {"agent": id, "step": label}
  std::vector<std::string> corroborators;
  Tick deadline_tick = 0;
  std::string quorum = "all";  // "all" or "any"

  friend bool operator==(const CorroborationRequest&, const CorroborationRequest&) = default;
};

struct CorroborationVerdict {
  std::string request_id;
  std::string verifier;
  Verdict verdict = Verdict::confirmed;
  Tick tick = 0;

  friend bool operator==(const CorroborationVerdict&, const CorroborationVerdict&) = default;
};

// Enum <-> wire string. Parsing an unknown token throws SerializationError.
std::string_view to_string(PlatformKind k);
std::string_view to_string(TargetClass c);
std::string_view to_string(C3Kind k);
std::string_view to_string(InteractionPattern p);
std::string_view to_string(SymbiosisMode m);
std::string_view to_string(MissionType t);
std::string_view to_string(Verdict v);
PlatformKind parse_platform_kind(std::string_view s);
TargetClass parse_target_class(std::string_view s);
C3Kind parse_c3_kind(std::string_view s);
InteractionPattern parse_interaction_pattern(std::string_view s);
SymbiosisMode parse_symbiosis_mode(std::string_view s);
MissionType parse_mission_type(std::string_view s);
Verdict parse_verdict(std::string_view s);

/// Maps an interaction onto exactly one C3 kind. Kinds of both parties are
/// accepted for logging context; the operational pattern decides the kind.
C3Kind classify_interaction(PlatformKind initiator, PlatformKind responder,
                            InteractionPattern pattern);
/// Throws ClassificationError for an unknown pattern token.
C3Kind classify_interaction(PlatformKind initiator, PlatformKind responder,
                            std::string_view pattern);

/// Lists every invariant violation of `descriptor`; `registered_ids` are the
/// agent ids already present in the fleet registry.
std::vector<std::string> validate_platform(const PlatformDescriptor& descriptor,
                                           const std::set<std::string>& registered_ids = {});

/// The five-camera layout of the quadruped platform (front-left, front-right,
/// left, right, back).
std::vector<CameraSpec> quadruped_camera_ring(double max_range, double fov);

void to_json(Json& j, const Point& v);
void from_json(const Json& j, Point& v);
void to_json(Json& j, const Rect& v);
void from_json(const Json& j, Rect& v);
void to_json(Json& j, const Pose2D& v);
void from_json(const Json& j, Pose2D& v);
void to_json(Json& j, const CameraSpec& v);
void from_json(const Json& j, CameraSpec& v);
void to_json(Json& j, const PlatformDescriptor& v);
void from_json(const Json& j, PlatformDescriptor& v);
void to_json(Json& j, const BatteryState& v);
void from_json(const Json& j, BatteryState& v);
void to_json(Json& j, const Detection& v);
void from_json(const Json& j, Detection& v);
void to_json(Json& j, const C3Event& v);
void from_json(const Json& j, C3Event& v);
void to_json(Json& j, const HistoryEntry& v);
void from_json(const Json& j, HistoryEntry& v);
void to_json(Json& j, const MissionInstance& v);
void from_json(const Json& j, MissionInstance& v);
void to_json(Json& j, const CorroborationRequest& v);
void from_json(const Json& j, CorroborationRequest& v);
void to_json(Json& j, const CorroborationVerdict& v);
void from_json(const Json& j, CorroborationVerdict& v);

}  // namespace fleet
