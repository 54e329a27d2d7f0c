#include "fleet/scenario.hpp"

#include <fstream>
#include <set>

#include "fleet/canonical.hpp"
#include "fleet/error.hpp"

namespace fleet {
namespace {

template <typename T>
void read(const Json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

gov::GovernanceConfig parse_governance(const Json& j) {
  gov::GovernanceConfig g;
  read(j, "detection_threshold", g.detection_threshold);
  read(j, "grasp_retries", g.grasp_retries);
  read(j, "search_timeout", g.search_timeout);
  read(j, "corroboration_deadline", g.corroboration_deadline);
  read(j, "auto_approve", g.auto_approve);
  read(j, "trace_radius", g.trace_radius);
  read(j, "trace_side", g.trace_side);
  read(j, "trace_samples", g.trace_samples);
  read(j, "placement_offset", g.placement_offset);
  for (const auto& t : j.value("disabled", Json::array())) g.disabled.insert(parse_mission_type(t.get<std::string>()));
  return g;
}

PlatformDescriptor parse_descriptor(Json d) {
  // Shorthand for the quadruped's five-camera ring.
  if (d.contains("camera_ring")) {
    const Json ring = d["camera_ring"];
    d.erase("camera_ring");
    d["cameras"] = quadruped_camera_ring(ring.at("max_range").get<double>(), ring.at("fov").get<double>());
  }
  return d.get<PlatformDescriptor>();
}

bool blocked(const sim::WorldState& w, Point p) {
  for (const auto& r : w.obstacles) {
    if (r.contains_strict(p)) return true;
  }
  return false;
}

}  // namespace

Scenario parse_scenario(const Json& j) {
  Scenario s;
  std::vector<std::string> problems;
  try {
    if (!j.is_object()) throw ScenarioError("scenario must be a JSON object");
    read(j, "name", s.name);
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("max_ticks")) s.max_ticks = j.at("max_ticks").get<Tick>();
    read(j, "telemetry_every", s.telemetry_every);
    read(j, "heartbeat_ticks", s.heartbeat_ticks);
    read(j, "tick_dt", s.world.tick_dt);
    if (j.contains("bounds")) s.world.bounds = j.at("bounds").get<Rect>();
    if (j.contains("obstacles")) s.world.obstacles = j.at("obstacles").get<std::vector<Rect>>();
    if (j.contains("world_params")) {
      const Json& p = j["world_params"];
      read(p, "grasp_reach", s.world.params.grasp_reach);
      read(p, "swap_radius", s.world.params.swap_radius);
      read(p, "agent_radius", s.world.params.agent_radius);
    }
    if (j.contains("perception")) read(j["perception"], "jitter", s.world.params.perception_jitter);
    s.governance = parse_governance(j.value("governance", Json::object()));

    std::set<std::string> ids;
    for (const auto& a : j.at("agents")) {
      AgentSpec spec;
      spec.descriptor = parse_descriptor(a.at("descriptor"));
      spec.behavior = a.value("behavior", Json::object());
      if (!ids.insert(spec.descriptor.agent_id).second) {
        problems.push_back("duplicate agent id '" + spec.descriptor.agent_id + "'");
        continue;
      }
      if (spec.descriptor.kind == PlatformKind::human_operator) {
        s.operator_behavior = spec.behavior;
      } else {
        sim::AgentBody body;
        body.descriptor = spec.descriptor;
        if (!a.contains("pose")) problems.push_back("agent '" + spec.descriptor.agent_id + "' has no pose");
        read(a, "pose", body.pose);
        read(a, "battery", body.battery);
        s.world.agents[spec.descriptor.agent_id] = body;
      }
      s.agents.push_back(std::move(spec));
    }
    const bool has_operator = std::any_of(s.agents.begin(), s.agents.end(), [](const AgentSpec& a) {
      return a.descriptor.kind == PlatformKind::human_operator;
    });
    if (!has_operator) {
      AgentSpec op;
      op.descriptor.agent_id = "operator";
      op.descriptor.kind = PlatformKind::human_operator;
      s.agents.push_back(op);
    }

    for (const auto& o : j.value("objects", Json::array())) {
      auto obj = o.get<sim::WorldObject>();
      if (s.world.objects.contains(obj.object_id)) problems.push_back("duplicate object id '" + obj.object_id + "'");
      s.world.objects[obj.object_id] = obj;
    }

    for (const auto& m : j.value("missions", Json::array())) {
      MissionSpec ms;
      ms.type = parse_mission_type(m.at("type").get<std::string>());
      ms.params = m.value("params", Json::object());
      const Json trigger = m.value("trigger", Json::object());
      if (trigger.is_string()) {
        if (trigger.get<std::string>() != "on_alert") problems.push_back("unknown trigger '" + trigger.get<std::string>() + "'");
        ms.on_alert = true;
      } else {
        if (trigger.contains("at_tick")) ms.at_tick = trigger["at_tick"].get<Tick>();
        if (trigger.contains("after")) ms.after = trigger["after"].get<std::size_t>();
      }
      s.missions.push_back(ms);
    }

    s.definitions = gov::default_definitions(s.governance);
    for (const auto& d : j.value("mission_definitions", Json::array())) {
      auto def = d.get<gov::MissionDefinition>();
      for (const auto& p : def.validate()) problems.push_back("mission definition " + std::string(to_string(def.mission_type)) + ": " + p);
      s.definitions[def.mission_type] = def;
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
  for (const auto& p : validate_scenario(s)) problems.push_back(p);
  if (!problems.empty()) {
    std::string msg = "invalid scenario";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw ScenarioError(msg);
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("cannot read scenario '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const std::exception& e) {
    throw ScenarioError("scenario '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_scenario(j);
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  const sim::WorldState& w = s.world;
  if (s.world.tick_dt <= 0.0) out.push_back("tick_dt must be positive");
  if (s.max_ticks && *s.max_ticks == 0) out.push_back("max_ticks must be positive");

  std::set<std::string> seen;
  for (const auto& a : s.agents) {
    for (const auto& v : validate_platform(a.descriptor, seen)) out.push_back("agent '" + a.descriptor.agent_id + "': " + v);
    seen.insert(a.descriptor.agent_id);
  }
  for (const auto& [id, body] : w.agents) {
    if (!w.bounds.contains(body.pose.position())) out.push_back("agent '" + id + "' starts outside the bounds");
    if (blocked(w, body.pose.position())) out.push_back("agent '" + id + "' starts inside an obstacle");
  }
  for (const auto& [id, obj] : w.objects) {
    if (!w.bounds.contains(obj.pose.position())) out.push_back("object '" + id + "' lies outside the bounds");
    if (blocked(w, obj.pose.position())) out.push_back("object '" + id + "' lies inside an obstacle");
  }

  auto any = [&](auto pred) {
    return std::any_of(s.agents.begin(), s.agents.end(), [&](const AgentSpec& a) { return pred(a.descriptor); });
  };
  auto kind = [](PlatformKind k) { return [k](const PlatformDescriptor& d) { return d.kind == k; }; };
  const bool quadruped = any(kind(PlatformKind::quadruped));
  const bool aerial = any(kind(PlatformKind::aerial));
  const bool fixed = any(kind(PlatformKind::fixed_camera));

  for (std::size_t i = 0; i < s.missions.size(); ++i) {
    const auto& m = s.missions[i];
    const std::string tag = "mission " + std::to_string(i) + " (" + std::string(to_string(m.type)) + ")";
    if (m.after) {
      if (*m.after >= i) out.push_back(tag + ": 'after' must name an earlier mission");
      else if (s.missions[*m.after].on_alert) out.push_back(tag + ": 'after' cannot name an on_alert mission");
    }
    if (m.on_alert && m.type != MissionType::M3) out.push_back(tag + ": only M3 can be triggered on alert");
    if (s.governance.disabled.contains(m.type)) continue;
    switch (m.type) {
      case MissionType::M1:
        if (!quadruped) out.push_back(tag + ": requires a quadruped");
        break;
      case MissionType::M2: {
        if (!quadruped) out.push_back(tag + ": requires a quadruped");
        if (!aerial && !fixed) out.push_back(tag + ": requires an aerial or fixed-camera corroborator");
        const Json wps = m.params.value("waypoints", Json::array());
        if (!wps.is_array() || wps.empty()) out.push_back(tag + ": requires waypoints");
        for (const auto& wp : wps) {
          Point p;
          try {
            p = wp.get<Point>();
          } catch (const std::exception&) {
            out.push_back(tag + ": malformed waypoint");
            continue;
          }
          if (!w.bounds.contains(p) || blocked(w, p)) out.push_back(tag + ": waypoint " + wp.dump() + " is unreachable");
        }
        break;
      }
      case MissionType::M3: {
        if (!any([](const PlatformDescriptor& d) { return d.kind == PlatformKind::quadruped && d.has_manipulator; })) {
          out.push_back(tag + ": requires a quadruped with a manipulator");
        }
        if (!any([](const PlatformDescriptor& d) { return d.kind == PlatformKind::wheeled && d.battery_capable; })) {
          out.push_back(tag + ": requires a battery-capable wheeled agent");
        }
        const bool box = std::any_of(w.objects.begin(), w.objects.end(), [](const auto& kv) {
          return kv.second.object_class == TargetClass::battery_box;
        });
        if (!box) out.push_back(tag + ": requires a battery box");
        break;
      }
    }
  }
  return out;
}

std::unique_ptr<agents::Controller> make_controller(const Scenario& s, const AgentSpec& a) {
  const Json& b = a.behavior;
  switch (a.descriptor.kind) {
    case PlatformKind::quadruped: {
      agents::QuadrupedParams p;
      read(b, "search_pattern", p.search_pattern);
      read(b, "lawnmower_spacing", p.lawnmower_spacing);
      read(b, "approach_stop", p.approach_stop);
      read(b, "partner_move_tolerance", p.partner_move_tolerance);
      read(b, "partner_lost_ticks", p.partner_lost_ticks);
      read(b, "trace_tolerance", p.trace_tolerance);
      return agents::make_quadruped(a.descriptor, p);
    }
    case PlatformKind::wheeled: {
      agents::WheeledParams p;
      read(b, "patrol", p.patrol);
      read(b, "speed_fraction", p.speed_fraction);
      read(b, "swap_ticks", p.swap_ticks);
      return agents::make_wheeled(a.descriptor, p);
    }
    case PlatformKind::aerial: {
      agents::AerialParams p;
      read(b, "follow_distance", p.follow_distance);
      read(b, "verdict_delay", p.verdict_delay);
      return agents::make_aerial(a.descriptor, p);
    }
    case PlatformKind::fixed_camera: {
      agents::FixedCameraParams p;
      read(b, "verdict_delay", p.verdict_delay);
      return agents::make_fixed_camera(a.descriptor, p);
    }
    case PlatformKind::human_operator: {
      agents::OperatorParams p;
      read(b, "approve_proposals", p.approve_proposals);
      read(b, "approve_delay", p.approve_delay);
      read(b, "verdict", p.verdict);
      read(b, "verdict_delay", p.verdict_delay);
      read(b, "retry_delay", p.retry_delay);
      read(b, "steer_aerial", p.steer_aerial);
      // Scenario mission indices -> schedule indices (on_alert entries are not scheduled).
      std::map<std::size_t, std::size_t> index;
      for (std::size_t i = 0; i < s.missions.size(); ++i) {
        const auto& m = s.missions[i];
        if (m.on_alert) continue;
        index[i] = p.schedule.size();
        agents::ScheduleEntry e{m.type, m.at_tick, std::nullopt, m.params};
        if (m.after) e.after = index.at(*m.after);
        p.schedule.push_back(e);
      }
      return std::make_unique<agents::ScriptedOperator>(a.descriptor, p);
    }
  }
  throw ScenarioError("unsupported platform kind");
}

}  // namespace fleet
