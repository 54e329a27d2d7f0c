#include "fleet/model.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include "fleet/error.hpp"

namespace fleet {
namespace {

template <class E, std::size_t N>
using Table = std::array<std::pair<E, std::string_view>, N>;

constexpr Table<PlatformKind, 5> kPlatformKinds{{
    {PlatformKind::quadruped, "quadruped"},
    {PlatformKind::wheeled, "wheeled"},
    {PlatformKind::aerial, "aerial"},
    {PlatformKind::fixed_camera, "fixed_camera"},
    {PlatformKind::human_operator, "operator"},
}};
constexpr Table<TargetClass, 2> kTargetClasses{{
    {TargetClass::battery_box, "battery_box"},
    {TargetClass::wheeled_platform, "wheeled_platform"},
}};
constexpr Table<C3Kind, 3> kC3Kinds{{
    {C3Kind::cooperation, "cooperation"},
    {C3Kind::collaboration, "collaboration"},
    {C3Kind::corroboration, "corroboration"},
}};
constexpr Table<InteractionPattern, 3> kPatterns{{
    {InteractionPattern::joint_task_step, "joint_task_step"},
    {InteractionPattern::assistance_on_fault, "assistance_on_fault"},
    {InteractionPattern::independent_verification, "independent_verification"},
}};
constexpr Table<SymbiosisMode, 3> kSymbiosis{{
    {SymbiosisMode::mutualism, "mutualism"},
    {SymbiosisMode::commensalism, "commensalism"},
    {SymbiosisMode::parasitism, "parasitism"},
}};
constexpr Table<MissionType, 3> kMissionTypes{{
    {MissionType::M1, "M1"},
    {MissionType::M2, "M2"},
    {MissionType::M3, "M3"},
}};
constexpr Table<Verdict, 2> kVerdicts{{
    {Verdict::confirmed, "confirmed"},
    {Verdict::denied, "denied"},
}};

template <class E, std::size_t N>
std::string_view lookup(const Table<E, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <class E, std::size_t N>
E lookup(const Table<E, N>& table, std::string_view name, const char* what) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  throw SerializationError(std::string("unknown ") + what + " '" + std::string(name) + "'");
}

template <class T>
void put_optional(Json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

std::optional<std::string> get_optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

}  // namespace

std::string_view to_string(PlatformKind k) { return lookup(kPlatformKinds, k); }
std::string_view to_string(TargetClass c) { return lookup(kTargetClasses, c); }
std::string_view to_string(C3Kind k) { return lookup(kC3Kinds, k); }
std::string_view to_string(InteractionPattern p) { return lookup(kPatterns, p); }
std::string_view to_string(SymbiosisMode m) { return lookup(kSymbiosis, m); }
std::string_view to_string(MissionType t) { return lookup(kMissionTypes, t); }
std::string_view to_string(Verdict v) { return lookup(kVerdicts, v); }

PlatformKind parse_platform_kind(std::string_view s) { return lookup(kPlatformKinds, s, "platform kind"); }
TargetClass parse_target_class(std::string_view s) { return lookup(kTargetClasses, s, "target class"); }
C3Kind parse_c3_kind(std::string_view s) { return lookup(kC3Kinds, s, "C3 kind"); }
InteractionPattern parse_interaction_pattern(std::string_view s) {
  return lookup(kPatterns, s, "interaction pattern");
}
SymbiosisMode parse_symbiosis_mode(std::string_view s) { return lookup(kSymbiosis, s, "symbiosis mode"); }
MissionType parse_mission_type(std::string_view s) { return lookup(kMissionTypes, s, "mission type"); }
Verdict parse_verdict(std::string_view s) { return lookup(kVerdicts, s, "verdict"); }

const CameraSpec* PlatformDescriptor::find_camera(std::string_view id) const {
  for (const auto& c : cameras) {
    if (c.camera_id == id) return &c;
  }
  return nullptr;
}

C3Kind classify_interaction(PlatformKind, PlatformKind, InteractionPattern pattern) {
  switch (pattern) {
    case InteractionPattern::joint_task_step:
      return C3Kind::cooperation;
    case InteractionPattern::assistance_on_fault:
      return C3Kind::collaboration;
    case InteractionPattern::independent_verification:
      return C3Kind::corroboration;
  }
  throw ClassificationError("unclassifiable interaction pattern");
}

C3Kind classify_interaction(PlatformKind initiator, PlatformKind responder, std::string_view pattern) {
  InteractionPattern p;
  try {
    p = parse_interaction_pattern(pattern);
  } catch (const SerializationError&) {
    throw ClassificationError("unknown interaction pattern '" + std::string(pattern) + "'");
  }
  return classify_interaction(initiator, responder, p);
}

std::vector<CameraSpec> quadruped_camera_ring(double max_range, double fov) {
  constexpr double pi = std::numbers::pi;
  return {
      {"front-left", pi / 6.0, fov, max_range},
      {"front-right", -pi / 6.0, fov, max_range},
      {"left", pi / 2.0, fov, max_range},
      {"right", -pi / 2.0, fov, max_range},
      {"back", pi, fov, max_range},
  };
}

std::vector<std::string> validate_platform(const PlatformDescriptor& d,
                                           const std::set<std::string>& registered_ids) {
  std::vector<std::string> out;
  if (d.agent_id.empty()) out.emplace_back("empty id");
  if (registered_ids.contains(d.agent_id)) out.emplace_back("duplicate id");
  if (!std::isfinite(d.max_speed) || d.max_speed < 0.0) out.emplace_back("invalid speed");

  std::set<std::string> camera_ids;
  for (const auto& c : d.cameras) {
    if (!camera_ids.insert(c.camera_id).second) out.emplace_back("duplicate camera id");
    if (!(c.fov > 0.0 && c.fov <= std::numbers::pi)) out.emplace_back("camera fov");
    if (!(c.max_range > 0.0) || !std::isfinite(c.max_range)) out.emplace_back("camera range");
  }

  switch (d.kind) {
    case PlatformKind::quadruped: {
      if (d.cameras.size() != 5) {
        out.emplace_back("camera count");
      } else {
        const std::set<std::string> expected{"front-left", "front-right", "left", "right", "back"};
        if (camera_ids != expected) out.emplace_back("camera layout");
      }
      if (!d.has_manipulator) out.emplace_back("manipulator required");
      break;
    }
    case PlatformKind::fixed_camera:
      if (d.max_speed != 0.0) out.emplace_back("fixed camera immobile");
      if (d.cameras.empty()) out.emplace_back("camera count");
      break;
    case PlatformKind::aerial:
      if (d.cameras.empty()) out.emplace_back("camera count");
      break;
    case PlatformKind::wheeled:
    case PlatformKind::human_operator:
      break;
  }
  return out;
}

void to_json(Json& j, const Point& v) { j = Json::array({v.x, v.y}); }
void from_json(const Json& j, Point& v) {
  if (!j.is_array() || j.size() != 2) throw SerializationError("point must be [x, y]");
  v = {j[0].get<double>(), j[1].get<double>()};
}

void to_json(Json& j, const Rect& v) { j = Json{{"min", v.min}, {"max", v.max}}; }
void from_json(const Json& j, Rect& v) {
  v.min = j.at("min").get<Point>();
  v.max = j.at("max").get<Point>();
  if (!(v.min.x < v.max.x && v.min.y < v.max.y)) throw SerializationError("degenerate rectangle");
}

void to_json(Json& j, const Pose2D& v) { j = Json{{"x", v.x}, {"y", v.y}, {"heading", v.heading}}; }
void from_json(const Json& j, Pose2D& v) {
  v = Pose2D(j.at("x").get<double>(), j.at("y").get<double>(), j.value("heading", 0.0));
}

void to_json(Json& j, const CameraSpec& v) {
  j = Json{{"camera_id", v.camera_id},
           {"mount_bearing", v.mount_bearing},
           {"fov", v.fov},
           {"max_range", v.max_range}};
}
void from_json(const Json& j, CameraSpec& v) {
  v.camera_id = j.at("camera_id").get<std::string>();
  v.mount_bearing = j.at("mount_bearing").get<double>();
  v.fov = j.at("fov").get<double>();
  v.max_range = j.at("max_range").get<double>();
}

void to_json(Json& j, const PlatformDescriptor& v) {
  j = Json{{"agent_id", v.agent_id},
           {"kind", to_string(v.kind)},
           {"cameras", v.cameras},
           {"has_manipulator", v.has_manipulator},
           {"battery_capable", v.battery_capable},
           {"max_speed", v.max_speed}};
}
void from_json(const Json& j, PlatformDescriptor& v) {
  v.agent_id = j.at("agent_id").get<std::string>();
  v.kind = parse_platform_kind(j.at("kind").get<std::string>());
  v.cameras = j.value("cameras", std::vector<CameraSpec>{});
  v.has_manipulator = j.value("has_manipulator", false);
  v.battery_capable = j.value("battery_capable", false);
  v.max_speed = j.value("max_speed", 0.0);
}

void to_json(Json& j, const BatteryState& v) {
  j = Json{{"level", v.level},
           {"drain_rate", v.drain_rate},
           {"alert_threshold", v.alert_threshold},
           {"immobilize_threshold", v.immobilize_threshold}};
}
void from_json(const Json& j, BatteryState& v) {
  v.level = j.value("level", 1.0);
  v.drain_rate = j.value("drain_rate", 0.0);
  v.alert_threshold = j.value("alert_threshold", 0.20);
  v.immobilize_threshold = j.value("immobilize_threshold", 0.05);
}

void to_json(Json& j, const Detection& v) {
  j = Json{{"target_class", to_string(v.target_class)},
           {"target_id", v.target_id},
           {"confidence", v.confidence},
           {"range", v.range},
           {"bearing", v.bearing},
           {"camera_id", v.camera_id},
           {"tick", v.tick}};
}
void from_json(const Json& j, Detection& v) {
  v.target_class = parse_target_class(j.at("target_class").get<std::string>());
  v.target_id = j.at("target_id").get<std::string>();
  v.confidence = j.at("confidence").get<double>();
  v.range = j.at("range").get<double>();
  v.bearing = j.at("bearing").get<double>();
  v.camera_id = j.at("camera_id").get<std::string>();
  v.tick = j.at("tick").get<Tick>();
}

void to_json(Json& j, const C3Event& v) {
  j = Json{{"event_id", v.event_id},
           {"kind", to_string(v.kind)},
           {"initiator", v.initiator},
           {"responder", v.responder},
           {"tick", v.tick},
           {"detail", v.detail}};
  put_optional(j, "mission", v.mission);
  if (v.symbiosis) j["symbiosis"] = to_string(*v.symbiosis);
}
void from_json(const Json& j, C3Event& v) {
  v.event_id = j.at("event_id").get<std::uint64_t>();
  v.kind = parse_c3_kind(j.at("kind").get<std::string>());
  v.initiator = j.at("initiator").get<std::string>();
  v.responder = j.at("responder").get<std::string>();
  v.mission = get_optional_string(j, "mission");
  v.tick = j.at("tick").get<Tick>();
  v.detail = j.value("detail", Json::object());
  v.symbiosis.reset();
  if (j.contains("symbiosis")) v.symbiosis = parse_symbiosis_mode(j.at("symbiosis").get<std::string>());
}

void to_json(Json& j, const HistoryEntry& v) {
  j = Json{{"tick", v.tick}, {"state", v.state}, {"cause", v.cause}};
}
void from_json(const Json& j, HistoryEntry& v) {
  v.tick = j.at("tick").get<Tick>();
  v.state = j.at("state").get<std::string>();
  v.cause = j.at("cause").get<std::string>();
}

void to_json(Json& j, const MissionInstance& v) {
  j = Json{{"mission_id", v.mission_id},
           {"mission_type", to_string(v.mission_type)},
           {"state", v.state},
           {"history", v.history},
           {"participants", v.participants},
           {"executor", v.executor},
           {"corroborators", v.corroborators}};
  put_optional(j, "beneficiary", v.beneficiary);
}
void from_json(const Json& j, MissionInstance& v) {
  v.mission_id = j.at("mission_id").get<std::string>();
  v.mission_type = parse_mission_type(j.at("mission_type").get<std::string>());
  v.state = j.at("state").get<std::string>();
  v.history = j.at("history").get<std::vector<HistoryEntry>>();
  v.participants = j.at("participants").get<std::vector<std::string>>();
  v.executor = j.at("executor").get<std::string>();
  v.corroborators = j.value("corroborators", std::vector<std::string>{});
  v.beneficiary = get_optional_string(j, "beneficiary");
}

void to_json(Json& j, const CorroborationRequest& v) {
  j = Json{{"request_id", v.request_id},
           {"mission_id", v.mission_id},
           {"subject", v.subject},
           {"corroborators", v.corroborators},
           {"deadline_tick", v.deadline_tick},
           {"quorum", v.quorum}};
}
void from_json(const Json& j, CorroborationRequest& v) {
  v.request_id = j.at("request_id").get<std::string>();
  v.mission_id = j.at("mission_id").get<std::string>();
  v.subject = j.at("subject");
  v.corroborators = j.at("corroborators").get<std::vector<std::string>>();
  v.deadline_tick = j.at("deadline_tick").get<Tick>();
  v.quorum = j.value("quorum", std::string("all"));
}

void to_json(Json& j, const CorroborationVerdict& v) {
  j = Json{{"request_id", v.request_id},
           {"verifier", v.verifier},
           {"verdict", to_string(v.verdict)},
           {"tick", v.tick}};
}
void from_json(const Json& j, CorroborationVerdict& v) {
  v.request_id = j.at("request_id").get<std::string>();
  v.verifier = j.at("verifier").get<std::string>();
  v.verdict = parse_verdict(j.at("verdict").get<std::string>());
  v.tick = j.at("tick").get<Tick>();
}

}  // namespace fleet
