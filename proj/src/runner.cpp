#include "fleet/runner.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "fleet/canonical.hpp"
#include "fleet/error.hpp"

namespace fleet {

namespace {

hub::HubConfig hub_config(const Scenario& s, std::uint64_t seed) {
  hub::HubConfig cfg;
  cfg.telemetry_every = s.telemetry_every;
  cfg.heartbeat_ticks = s.heartbeat_ticks;
  cfg.governance = s.governance;
  cfg.definitions = s.definitions;
  cfg.run_info = Json{{"scenario", s.name}, {"seed", seed}};
  return cfg;
}

sim::WorldState seeded(sim::WorldState w, std::uint64_t seed) {
  w.rng_seed = seed;
  return w;
}

}  // namespace

Simulation::Simulation(Scenario scenario, std::uint64_t seed, EventLog& log)
    : scenario_(std::move(scenario)),
      hub_(hub_config(scenario_, seed), seeded(scenario_.world, seed), log) {
  for (const auto& a : scenario_.agents) {
    auto c = make_controller(scenario_, a);
    if (auto* op = dynamic_cast<agents::ScriptedOperator*>(c.get())) operator_ = op;
    controllers_[a.descriptor.agent_id] = std::move(c);
  }
  // Sessions open in agent-id order, the same order controllers are stepped in.
  for (auto& [id, c] : controllers_) {
    const std::string agent = id;
    conns_[id] = hub_.connect([this, agent](const proto::Frame& f) { inbox_[agent].push_back(f); });
    hub_.receive(conns_[id], c->hello(hub_.world()));
  }
}

hub::ConnectionId Simulation::attach(hub::Deliver deliver, bool remote) { return hub_.connect(std::move(deliver), remote); }

void Simulation::submit(hub::ConnectionId conn, std::string line) { external_.emplace_back(conn, std::move(line)); }

void Simulation::detach(hub::ConnectionId conn) { hub_.disconnect(conn, "connection closed"); }

void Simulation::tick() {
  const sim::WorldState world = hub_.world();
  std::vector<sim::Command> actuation;
  std::vector<std::pair<hub::ConnectionId, proto::Frame>> frames;
  for (auto& [id, c] : controllers_) {
    std::vector<proto::Frame> in;
    in.swap(inbox_[id]);
    auto out = c->step(world, in);
    for (auto& f : out.frames) frames.emplace_back(conns_.at(id), std::move(f));
    actuation.insert(actuation.end(), out.actuation.begin(), out.actuation.end());
  }
  for (const auto& [conn, f] : frames) hub_.receive(conn, f);
  while (!external_.empty()) {
    auto [conn, line] = std::move(external_.front());
    external_.pop_front();
    hub_.receive_line(conn, line);
  }
  hub_.end_tick();
  hub_.step_world(actuation);
}

bool Simulation::done() const {
  const auto& g = hub_.governance();
  for (const auto& [id, m] : g.missions()) {
    if (!g.definitions().at(m.mission_type).is_terminal(m.state)) return false;
  }
  if (operator_ && !operator_->schedule_settled()) return false;
  std::size_t assisted = 0;
  for (const auto& [id, p] : g.proposals()) {
    if (p.status == "pending" || p.status == "approved") return false;
    if (p.status == "triggered") ++assisted;
  }
  const auto on_alert = std::count_if(scenario_.missions.begin(), scenario_.missions.end(),
                                      [](const MissionSpec& m) { return m.on_alert; });
  return assisted >= static_cast<std::size_t>(on_alert);
}

std::string resolve_log_path(const RunConfig& config, const Scenario& scenario, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::path p = config.log.empty() ? fs::path("logs") / (scenario.name + "-" + std::to_string(seed) + ".jsonl")
                                  : fs::path(config.log);
  if (const char* dir = std::getenv("FLEET_LOG_DIR"); dir && *dir) p = fs::path(dir) / p.filename();
  return p.string();
}

RunResult run(const RunConfig& config) {
  RunResult r;
  Scenario s;
  try {
    s = load_scenario(config.scenario);
  } catch (const ScenarioError& e) {
    r.exit_code = 2;
    r.diagnostics.push_back(e.what());
    return r;
  }
  s.governance.disabled.insert(config.disabled.begin(), config.disabled.end());
  s.governance.auto_approve = s.governance.auto_approve || config.auto_approve;
  r.diagnostics = validate_scenario(s);
  std::optional<std::uint64_t> seed = config.seed ? config.seed : s.seed;
  if (!seed) {
    if (config.deterministic) r.diagnostics.push_back("seed required in deterministic mode");
    else seed = std::random_device{}();
  }
  const Tick max_ticks = config.max_ticks.value_or(s.max_ticks.value_or(kDefaultMaxTicks));
  if (max_ticks == 0) r.diagnostics.push_back("max_ticks must be positive");
  if (!r.diagnostics.empty()) {
    r.exit_code = 2;
    return r;
  }

  r.log_path = resolve_log_path(config, s, *seed);
  if (const auto dir = std::filesystem::path(r.log_path).parent_path(); !dir.empty()) {
    std::filesystem::create_directories(dir);
  }
  EventLog log(r.log_path);
  Simulation sim(s, *seed, log);
  const auto pace = std::chrono::duration<double>(s.world.tick_dt / (config.speed > 0 ? config.speed : 1.0));
  bool finished = false;
  while (sim.hub().tick() < max_ticks) {
    sim.tick();
    if (sim.done()) {
      finished = true;
      break;
    }
    if (!config.headless && config.speed > 0) std::this_thread::sleep_for(pace);
  }
  sim.shutdown(finished ? "run complete" : "max ticks reached");
  log.finalize();

  r.ticks = sim.hub().tick();
  r.digest = log.digest();
  bool success = true;
  for (const auto& [id, m] : sim.hub().governance().missions()) {
    r.missions.push_back(m);
    if (m.state != gov::state::completed) success = false;
  }
  if (const auto* op = sim.scripted_operator()) {
    for (const auto& e : op->entries()) {
      if (e.state == agents::ScriptedOperator::EntryState::rejected) {
        success = false;
        r.diagnostics.push_back("mission trigger rejected: " + e.reason.value_or(""));
      } else if (e.state != agents::ScriptedOperator::EntryState::finished) {
        success = false;
        r.diagnostics.push_back("scheduled mission did not finish");
      }
    }
  }
  if (!finished) r.diagnostics.push_back("run stopped at max ticks (" + std::to_string(max_ticks) + ")");
  r.exit_code = success ? 0 : 1;

  r.report = resilience_report(log.lines());
  Json report = r.report;
  std::ofstream(r.log_path + ".report.json") << canonical_serialize(report) << '\n';
  return r;
}

}  // namespace fleet
