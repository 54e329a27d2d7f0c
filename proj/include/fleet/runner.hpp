#pragma once
// Lockstep driver: in-process controllers, the hub and the world advance
// together one tick at a time.

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fleet/agents.hpp"
#include "fleet/hub.hpp"
#include "fleet/report.hpp"
#include "fleet/scenario.hpp"

namespace fleet {

struct RunConfig {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<Tick> max_ticks;
  double speed = 1.0;  // wall-clock multiplier; ignored when headless
  std::string log;     // empty: <scenario name>-<seed>.jsonl under the log directory
  bool deterministic = true;
  bool auto_approve = false;
  bool headless = true;
  std::set<MissionType> disabled;
};

inline constexpr Tick kDefaultMaxTicks = 20000;

/// Lockstep simulation over a parsed scenario.
class Simulation {
 public:
  /// `seed` seeds the world; `log` receives every routed frame.
  Simulation(Scenario scenario, std::uint64_t seed, EventLog& log);

  /// One full tick: controllers, routing, governance timers, world step.
  void tick();
  /// Every scheduled mission has settled, alert-driven missions have run and
  /// nothing is pending.
  bool done() const;
  void shutdown(const std::string& reason) { hub_.shutdown(reason); }

  hub::Hub& hub() { return hub_; }
  const hub::Hub& hub() const { return hub_; }
  const Scenario& scenario() const { return scenario_; }
  const agents::ScriptedOperator* scripted_operator() const { return operator_; }

  /// Extra session (e.g. a network client). Frames it sends are routed at the
  /// next tick in submission order.
  hub::ConnectionId attach(hub::Deliver deliver, bool remote = true);
  void submit(hub::ConnectionId conn, std::string line);
  void detach(hub::ConnectionId conn);

 private:
  Scenario scenario_;
  hub::Hub hub_;
  std::map<std::string, std::unique_ptr<agents::Controller>> controllers_;
  std::map<std::string, hub::ConnectionId> conns_;
  std::map<std::string, std::vector<proto::Frame>> inbox_;
  std::deque<std::pair<hub::ConnectionId, std::string>> external_;
  agents::ScriptedOperator* operator_ = nullptr;
};

struct RunResult {
  int exit_code = 0;  // 0 all triggered missions Completed, 1 otherwise, 2 invalid scenario
  std::string log_path;
  std::string digest;
  std::vector<std::string> diagnostics;
  std::vector<MissionInstance> missions;
  ResilienceReport report;
  Tick ticks = 0;
};

/// Boots a run from files; scenario problems come back as exit code 2.
RunResult run(const RunConfig& config);

/// Log location: FLEET_LOG_DIR (when set) replaces the directory part.
std::string resolve_log_path(const RunConfig& config, const Scenario& scenario, std::uint64_t seed);

}  // namespace fleet
