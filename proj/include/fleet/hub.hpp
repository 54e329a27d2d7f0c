#pragma once
// Digital-twin hub: sessions, frame routing, the canonical event log, the
// world tick and snapshots. All mutation goes through one caller at a time.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fleet/event_log.hpp"
#include "fleet/governance.hpp"
#include "fleet/protocol.hpp"
#include "fleet/world.hpp"

namespace fleet::hub {

struct HubConfig {
  Tick telemetry_every = 5;
  Tick heartbeat_ticks = 600;
  gov::GovernanceConfig governance;
  std::map<MissionType, gov::MissionDefinition> definitions;  // overrides; defaults fill the rest
  Json run_info = Json::object();
};

struct SessionRecord {
  std::string agent_id;
  PlatformDescriptor descriptor;
  Tick connected_tick = 0;
  std::uint64_t last_seq_in = 0;
  std::uint64_t last_seq_out = 0;
  Tick last_frame_tick = 0;
  bool remote = false;
};

struct Snapshot {
  Tick tick = 0;
  sim::WorldState world;
  std::vector<MissionInstance> missions;
  std::vector<SessionRecord> sessions;
  std::vector<gov::Proposal> proposals;
  std::vector<CorroborationRequest> open_requests;
  std::map<std::string, Json> telemetry;
  std::map<std::string, Detection> detections;
};

Json snapshot_to_json(const Snapshot& s);

using ConnectionId = std::uint64_t;
using Deliver = std::function<void(const proto::Frame&)>;

struct RouteResult {
  std::vector<std::string> delivered_to;  // session ids, plus "hub" for hub-bound frames
  std::optional<std::string> error;
  bool session_closed = false;
};

class Hub {
 public:
  Hub(HubConfig cfg, sim::WorldState world, EventLog& log);

  /// `remote` sessions are mirrored into the world from their telemetry
  /// instead of being simulated in-process.
  ConnectionId connect(Deliver deliver, bool remote = false);
  void disconnect(ConnectionId conn, const std::string& reason);
  bool is_open(ConnectionId conn) const;

  /// Entry point for every inbound frame: HELLO registers, anything else is routed.
  void receive(ConnectionId conn, const proto::Frame& frame);
  /// Decodes one wire line; malformed input closes the connection with ERROR.
  void receive_line(ConnectionId conn, std::string_view line);

  /// Returns the WELCOME or ERROR frame that was sent back.
  proto::Frame register_agent(ConnectionId conn, const proto::Frame& hello);
  RouteResult route(ConnectionId conn, const proto::Frame& frame);

  /// Governance timers and heartbeats at the current tick.
  void end_tick();
  /// Applies actuation (plus pending twin syncs) and advances the tick.
  sim::StepResult step_world(const std::vector<sim::Command>& actuation);
  /// Broadcasts BYE; the last log line carries the final tick.
  void shutdown(const std::string& reason);

  Snapshot snapshot() const;
  const sim::WorldState& world() const { return world_; }
  Tick tick() const { return world_.tick; }
  const gov::Governance& governance() const { return gov_; }
  const std::map<std::string, SessionRecord>& sessions() const { return sessions_; }
  gov::Registry registry() const;
  const EventLog& log() const { return log_; }
  const HubConfig& config() const { return cfg_; }

 private:
  struct Connection {
    Deliver deliver;
    std::optional<std::string> agent_id;
    bool remote = false;
    bool open = true;
  };

  proto::Frame emit(proto::FrameType type, const std::string& dst, Json payload,
                    std::optional<ConnectionId> direct = std::nullopt);
  void deliver_to(const std::string& agent_id, const proto::Frame& f);
  void log_frame(const proto::Frame& f);
  void flush_effects();
  void close_session(const std::string& agent_id, const std::string& reason);
  void error_to(const std::string& agent_id, const std::string& reason, Json extra = Json::object());
  void handle_hub_frame(const proto::Frame& f);
  void handle_mission_status(const proto::Frame& f);

  HubConfig cfg_;
  sim::WorldState world_;
  EventLog& log_;
  gov::Governance gov_;
  proto::FrameWriter writer_{proto::kHub};
  std::map<ConnectionId, Connection> connections_;
  std::map<std::string, SessionRecord> sessions_;
  std::map<std::string, ConnectionId> session_conn_;
  std::map<std::string, Json> telemetry_;
  std::map<std::string, Detection> detections_;
  std::vector<sim::Command> pending_sync_;
  ConnectionId next_conn_ = 1;
  bool shut_down_ = false;
};

}  // namespace fleet::hub
