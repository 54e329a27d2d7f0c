// fleet: run scenarios headless, verify and replay event logs, serve a live hub.

#include <CLI11.hpp>
#include <iostream>

#include "fleet/canonical.hpp"
#include "fleet/error.hpp"
#include "fleet/net.hpp"
#include "fleet/replay.hpp"
#include "fleet/runner.hpp"
#include "fleet/verify.hpp"

namespace {

using namespace fleet;

int cmd_run(const RunConfig& cfg) {
  const RunResult r = run(cfg);
  for (const auto& d : r.diagnostics) std::cerr << d << "\n";
  if (r.exit_code == 2) return 2;
  for (const auto& m : r.missions) {
    const auto& last = m.history.back();
    std::cout << m.mission_id << " " << m.state << " at tick " << last.tick << " (" << last.cause << ")\n";
  }
  std::cout << "ticks " << r.ticks << "\n";
  std::cout << "log " << r.log_path << "\n";
  std::cout << "sha256 " << r.digest << "\n";
  std::cout << "report " << canonical_serialize(Json(r.report)) << "\n";
  return r.exit_code;
}

int cmd_verify(const std::string& path) {
  VerifyResult v;
  try {
    v = verify_log(path);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (v.ok()) {
    std::cout << "PASS " << path << " (" << v.lines << " records)\n";
    return 0;
  }
  for (const auto& x : v.violations) std::cout << "line " << x.offset << ": " << x.kind << ": " << x.detail << "\n";
  std::cout << "FAIL " << v.violations.size() << " violation(s)\n";
  return 1;
}

int cmd_replay(const std::string& path, double speed, std::optional<std::uint16_t> port, const std::string& bind) {
  VerifyResult v;
  try {
    if (port) {
      std::cerr << "waiting for a WebSocket client on " << bind << ":" << *port << "\n";
      net::serve_lines_over_websocket(bind, *port, [&](const auto& sink) { v = replay(path, speed, sink); });
    } else {
      v = replay(path, speed, [](const std::string& line) { std::cout << line << "\n"; });
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (!v.ok()) {
    for (const auto& x : v.violations) std::cerr << "line " << x.offset << ": " << x.kind << ": " << x.detail << "\n";
    return 1;
  }
  return 0;
}

int cmd_serve(RunConfig cfg, net::ServeOptions opts) {
  Scenario s;
  try {
    s = load_scenario(cfg.scenario);
  } catch (const ScenarioError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  s.governance.disabled.insert(cfg.disabled.begin(), cfg.disabled.end());
  s.governance.auto_approve = s.governance.auto_approve || cfg.auto_approve;
  const std::uint64_t seed = cfg.seed.value_or(s.seed.value_or(0));
  const std::string path = resolve_log_path(cfg, s, seed);
  if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty()) std::filesystem::create_directories(dir);
  EventLog log(path);
  Simulation sim(s, seed, log);
  opts.max_ticks = cfg.max_ticks;
  opts.handle_signals = true;
  net::Server server(sim, opts);
  std::cerr << "hub listening: http/ws " << opts.bind << ":" << server.http_port();
  if (auto p = server.tcp_port()) std::cerr << ", tcp " << *p;
  std::cerr << "\n";
  server.run();
  log.finalize();
  std::cout << "log " << path << "\nsha256 " << log.digest() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-robot fleet simulator and digital-twin hub"};
  app.require_subcommand(1);

  RunConfig run_cfg;
  std::vector<std::string> disabled;
  std::uint64_t seed = 0;
  Tick max_ticks = 0;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its event log");
  run_cmd->add_option("--scenario", run_cfg.scenario, "Scenario JSON file")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "64-bit seed (defaults to the scenario's)");
  auto* max_opt = run_cmd->add_option("--max-ticks", max_ticks, "Tick limit");
  run_cmd->add_option("--log", run_cfg.log, "Log path (FLEET_LOG_DIR overrides the directory)");
  run_cmd->add_flag("--deterministic,!--nondeterministic", run_cfg.deterministic, "Lockstep mode (default)");
  run_cmd->add_flag("--auto-approve", run_cfg.auto_approve, "Trigger assistance missions without operator approval");
  run_cmd->add_flag("--headless", run_cfg.headless, "No wall-clock pacing");
  run_cmd->add_option("--speed", run_cfg.speed, "Wall-clock speed multiplier")->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--disable", disabled, "Disable a mission type (M1, M2, M3)");
  run_cfg.headless = false;

  std::string verify_log_path;
  auto* verify_cmd = app.add_subcommand("verify", "Check a log against the published invariants");
  verify_cmd->add_option("--log", verify_log_path, "Log file")->required();

  std::string replay_log_path;
  double replay_speed = 1.0;
  std::uint16_t replay_port = 0;
  std::string bind = "127.0.0.1";
  auto* replay_cmd = app.add_subcommand("replay", "Re-emit a verified log with its original pacing");
  replay_cmd->add_option("--log", replay_log_path, "Log file")->required();
  replay_cmd->add_option("--speed", replay_speed, "Speed multiplier; 0 is as fast as possible")->check(CLI::NonNegativeNumber);
  auto* port_opt = replay_cmd->add_option("--port", replay_port, "Serve over WebSocket instead of stdout");
  replay_cmd->add_option("--bind", bind, "Listen address");

  RunConfig serve_cfg;
  net::ServeOptions serve_opts;
  std::uint16_t tcp_port = 0;
  std::uint64_t serve_seed = 0;
  Tick serve_max = 0;
  auto* serve_cmd = app.add_subcommand("serve", "Run a live hub with network endpoints");
  serve_cmd->add_option("--scenario", serve_cfg.scenario, "Scenario JSON file")->required();
  auto* serve_seed_opt = serve_cmd->add_option("--seed", serve_seed, "64-bit seed");
  auto* serve_max_opt = serve_cmd->add_option("--max-ticks", serve_max, "Tick limit")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--log", serve_cfg.log, "Log path");
  serve_cmd->add_option("--port", serve_opts.http_port, "HTTP/WebSocket port");
  auto* tcp_opt = serve_cmd->add_option("--tcp-port", tcp_port, "Line-protocol TCP port");
  serve_cmd->add_option("--bind", serve_opts.bind, "Listen address");
  serve_cmd->add_option("--speed", serve_opts.speed, "Wall-clock speed multiplier")->check(CLI::NonNegativeNumber);
  serve_cmd->add_flag("--auto-approve", serve_cfg.auto_approve, "Trigger assistance missions without approval");
  std::vector<std::string> serve_disabled;
  serve_cmd->add_option("--disable", serve_disabled, "Disable a mission type (M1, M2, M3)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help exits 0; any malformed invocation is an invalid configuration.
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      if (*seed_opt) run_cfg.seed = seed;
      if (*max_opt) run_cfg.max_ticks = max_ticks;
      for (const auto& d : disabled) run_cfg.disabled.insert(parse_mission_type(d));
      return cmd_run(run_cfg);
    }
    if (*verify_cmd) return cmd_verify(verify_log_path);
    if (*replay_cmd) {
      return cmd_replay(replay_log_path, replay_speed, *port_opt ? std::optional(replay_port) : std::nullopt, bind);
    }
    if (*serve_cmd) {
      if (*serve_seed_opt) serve_cfg.seed = serve_seed;
      if (*serve_max_opt) serve_cfg.max_ticks = serve_max;
      if (*tcp_opt) serve_opts.tcp_port = tcp_port;
      for (const auto& d : serve_disabled) serve_cfg.disabled.insert(parse_mission_type(d));
      return cmd_serve(serve_cfg, serve_opts);
    }
  } catch (const SerializationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
