#pragma once
// Scenario files: the single source of world truth for a run.

#include <optional>
#include <string>
#include <vector>

#include "fleet/agents.hpp"
#include "fleet/governance.hpp"
#include "fleet/world.hpp"

namespace fleet {

struct AgentSpec {
  PlatformDescriptor descriptor;
  Json behavior = Json::object();
};

struct MissionSpec {
  MissionType type = MissionType::M1;
  bool on_alert = false;
  std::optional<Tick> at_tick;
  std::optional<std::size_t> after;
  Json params = Json::object();
};

struct Scenario {
  std::string name = "scenario";
  std::optional<std::uint64_t> seed;
  std::optional<Tick> max_ticks;
  Tick telemetry_every = 5;
  Tick heartbeat_ticks = 600;
  sim::WorldState world;  // agents with bodies, objects, obstacles
  std::vector<AgentSpec> agents;  // every participant, including the operator
  std::vector<MissionSpec> missions;
  gov::GovernanceConfig governance;
  std::map<MissionType, gov::MissionDefinition> definitions;  // full set after overrides
  Json operator_behavior = Json::object();
};

/// Parses and validates. Throws ScenarioError listing every diagnostic.
Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::string& path);

/// Structural checks against the enabled mission set; empty when valid.
std::vector<std::string> validate_scenario(const Scenario& s);

/// Builds the in-process controller for one participant.
std::unique_ptr<agents::Controller> make_controller(const Scenario& s, const AgentSpec& a);

}  // namespace fleet
