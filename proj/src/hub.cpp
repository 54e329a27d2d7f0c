#include "fleet/hub.hpp"

#include <algorithm>

#include "fleet/canonical.hpp"
#include "fleet/error.hpp"

namespace fleet::hub {

using proto::Frame;
using proto::FrameType;

namespace {

Json session_to_json(const SessionRecord& s) {
  return Json{{"agent_id", s.agent_id},
              {"descriptor", s.descriptor},
              {"connected_tick", s.connected_tick},
              {"last_seq_in", s.last_seq_in},
              {"last_seq_out", s.last_seq_out},
              {"last_frame_tick", s.last_frame_tick},
              {"remote", s.remote}};
}

}  // namespace

Json snapshot_to_json(const Snapshot& s) {
  Json sessions = Json::array();
  for (const auto& r : s.sessions) sessions.push_back(session_to_json(r));
  Json proposals = Json::array();
  for (const auto& p : s.proposals) proposals.push_back(p);
  return Json{{"tick", s.tick},
              {"world", s.world},
              {"missions", s.missions},
              {"sessions", sessions},
              {"proposals", proposals},
              {"open_requests", s.open_requests},
              {"telemetry", s.telemetry},
              {"detections", s.detections}};
}

Hub::Hub(HubConfig cfg, sim::WorldState world, EventLog& log)
    : cfg_(std::move(cfg)),
      world_(std::move(world)),
      log_(log),
      gov_(cfg_.governance, cfg_.definitions.empty() ? gov::default_definitions(cfg_.governance) : cfg_.definitions) {
  Json defs = Json::array();
  for (const auto& [type, def] : gov_.definitions()) defs.push_back(def);
  emit(FrameType::EVENT, proto::kBroadcast,
       Json{{"config",
             {{"tick_dt", world_.tick_dt},
              {"telemetry_every", cfg_.telemetry_every},
              {"heartbeat_ticks", cfg_.heartbeat_ticks},
              {"governance", cfg_.governance},
              {"mission_definitions", defs},
              {"run", cfg_.run_info}}}});
}

ConnectionId Hub::connect(Deliver deliver, bool remote) {
  const ConnectionId id = next_conn_++;
  connections_[id] = Connection{std::move(deliver), std::nullopt, remote, true};
  return id;
}

bool Hub::is_open(ConnectionId conn) const {
  auto it = connections_.find(conn);
  return it != connections_.end() && it->second.open;
}

void Hub::disconnect(ConnectionId conn, const std::string& reason) {
  auto it = connections_.find(conn);
  if (it == connections_.end() || !it->second.open) return;
  if (it->second.agent_id) {
    close_session(*it->second.agent_id, reason);
  }
  it->second.open = false;
}

gov::Registry Hub::registry() const {
  gov::Registry r;
  for (const auto& [id, s] : sessions_) r[id] = s.descriptor;
  return r;
}

void Hub::log_frame(const Frame& f) { log_.append(proto::frame_to_json(f)); }

Frame Hub::emit(FrameType type, const std::string& dst, Json payload, std::optional<ConnectionId> direct) {
  Frame f = writer_.make(type, dst, world_.tick, std::move(payload));
  log_frame(f);
  if (direct) {
    auto it = connections_.find(*direct);
    if (it != connections_.end() && it->second.open) it->second.deliver(f);
  } else if (dst == proto::kBroadcast) {
    for (const auto& [id, s] : sessions_) deliver_to(id, f);
  } else if (dst != proto::kHub) {
    deliver_to(dst, f);
  }
  return f;
}

void Hub::deliver_to(const std::string& agent_id, const Frame& f) {
  auto s = session_conn_.find(agent_id);
  if (s == session_conn_.end()) return;
  auto c = connections_.find(s->second);
  if (c == connections_.end() || !c->second.open) return;
  if (f.src == proto::kHub) sessions_.at(agent_id).last_seq_out = f.seq;
  c->second.deliver(f);
}

void Hub::error_to(const std::string& agent_id, const std::string& reason, Json extra) {
  extra["reason"] = reason;
  emit(FrameType::ERROR, agent_id, std::move(extra));
}

void Hub::close_session(const std::string& agent_id, const std::string& reason) {
  auto s = sessions_.find(agent_id);
  if (s == sessions_.end()) return;
  error_to(agent_id, reason, Json{{"closed", true}});
  const ConnectionId conn = session_conn_.at(agent_id);
  sessions_.erase(s);
  session_conn_.erase(agent_id);
  if (auto c = connections_.find(conn); c != connections_.end()) c->second.open = false;
  gov_.participant_lost(agent_id, world_.tick);
  flush_effects();
}

void Hub::receive_line(ConnectionId conn, std::string_view line) {
  Frame f;
  try {
    f = proto::decode_frame(line);
  } catch (const ProtocolError& e) {
    auto it = connections_.find(conn);
    if (it == connections_.end() || !it->second.open) return;
    if (it->second.agent_id) {
      close_session(*it->second.agent_id, std::string("malformed frame: ") + e.what());
    } else {
      emit(FrameType::ERROR, "unregistered", Json{{"reason", std::string("malformed frame: ") + e.what()}, {"closed", true}},
           conn);
      it->second.open = false;
    }
    return;
  }
  receive(conn, f);
}

void Hub::receive(ConnectionId conn, const Frame& frame) {
  auto it = connections_.find(conn);
  if (it == connections_.end() || !it->second.open) return;
  if (!it->second.agent_id) {
    if (frame.type != FrameType::HELLO) {
      emit(FrameType::ERROR, frame.src, Json{{"reason", "HELLO required"}, {"closed", true}}, conn);
      it->second.open = false;
      return;
    }
    register_agent(conn, frame);
    return;
  }
  route(conn, frame);
}

Frame Hub::register_agent(ConnectionId conn, const Frame& hello) {
  auto refuse = [&](Json payload) {
    payload["closed"] = true;
    Frame f = emit(FrameType::ERROR, hello.src, std::move(payload), conn);
    connections_.at(conn).open = false;
    return f;
  };
  if (hello.type != FrameType::HELLO || hello.seq != 1) return refuse(Json{{"reason", "HELLO with seq 1 required"}});
  PlatformDescriptor d;
  try {
    d = hello.payload.at("descriptor").get<PlatformDescriptor>();
  } catch (const std::exception& e) {
    return refuse(Json{{"reason", "invalid descriptor"}, {"violations", {std::string(e.what())}}});
  }
  if (d.agent_id != hello.src) return refuse(Json{{"reason", "src does not match descriptor"}});
  if (sessions_.contains(d.agent_id)) return refuse(Json{{"reason", "duplicate id"}});
  std::set<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.insert(id);
  const auto violations = validate_platform(d, ids);
  if (!violations.empty()) return refuse(Json{{"reason", "invalid descriptor"}, {"violations", violations}});

  Connection& c = connections_.at(conn);
  c.agent_id = d.agent_id;
  SessionRecord rec{d.agent_id, d, world_.tick, 1, 0, world_.tick, c.remote};
  sessions_[d.agent_id] = rec;
  session_conn_[d.agent_id] = conn;
  log_frame(hello);

  if (d.kind != PlatformKind::human_operator && !world_.agents.contains(d.agent_id)) {
    sim::AgentBody body;
    body.descriptor = d;
    if (hello.payload.contains("pose")) body.pose = hello.payload["pose"].get<Pose2D>();
    if (hello.payload.contains("battery")) body.battery = hello.payload["battery"].get<BatteryState>();
    world_.agents[d.agent_id] = body;
  }
  return emit(FrameType::WELCOME, d.agent_id,
              Json{{"session", d.agent_id},
                   {"tick_dt", world_.tick_dt},
                   {"detection_threshold", cfg_.governance.detection_threshold},
                   {"telemetry_every", cfg_.telemetry_every},
                   {"heartbeat_ticks", cfg_.heartbeat_ticks}});
}

RouteResult Hub::route(ConnectionId conn, const Frame& f) {
  RouteResult result;
  auto c = connections_.find(conn);
  if (c == connections_.end() || !c->second.open || !c->second.agent_id) {
    result.error = "no session";
    return result;
  }
  const std::string agent = *c->second.agent_id;
  SessionRecord& s = sessions_.at(agent);
  if (f.src != agent) {
    close_session(agent, "source mismatch");
    result.error = "source mismatch";
    result.session_closed = true;
    return result;
  }
  if (f.seq != s.last_seq_in + 1) {
    close_session(agent, "sequence violation");
    result.error = "sequence violation";
    result.session_closed = true;
    return result;
  }
  s.last_seq_in = f.seq;
  s.last_frame_tick = world_.tick;
  log_frame(f);

  if (f.dst == proto::kHub) {
    result.delivered_to.push_back(proto::kHub);
    handle_hub_frame(f);
  } else if (f.dst == proto::kBroadcast) {
    for (const auto& [id, rec] : sessions_) {
      if (id == agent) continue;
      result.delivered_to.push_back(id);
      deliver_to(id, f);
    }
  } else if (sessions_.contains(f.dst)) {
    result.delivered_to.push_back(f.dst);
    deliver_to(f.dst, f);
    if (f.type == FrameType::COMMAND && f.payload.value("verb", "") == "follow") {
      gov_.on_follow(f.dst, f.payload.value("target", ""), registry(), world_.tick);
    }
  } else {
    result.error = "unknown destination";
    error_to(agent, "unknown destination", Json{{"dst", f.dst}, {"seq", f.seq}});
  }
  flush_effects();
  return result;
}

void Hub::handle_hub_frame(const Frame& f) {
  const Tick now = world_.tick;
  switch (f.type) {
    case FrameType::TELEMETRY: {
      telemetry_[f.src] = f.payload;
      if (sessions_.at(f.src).remote && f.payload.contains("pose")) {
        try {
          pending_sync_.push_back(sim::SyncPose{f.src, f.payload["pose"].get<Pose2D>()});
        } catch (const std::exception& e) {
          error_to(f.src, std::string("bad pose: ") + e.what());
        }
      }
      break;
    }
    case FrameType::DETECTION: {
      try {
        detections_[f.src] = f.payload.at("detection").get<Detection>();
      } catch (const std::exception& e) {
        error_to(f.src, std::string("bad detection: ") + e.what());
      }
      break;
    }
    case FrameType::ALERT: {
      if (f.payload.value("kind", "") != "battery_low") break;
      try {
        gov_.handle_alert(f.src, f.payload, registry(), now);
      } catch (const Error& e) {
        error_to(f.src, e.what());
      }
      break;
    }
    case FrameType::MISSION_TRIGGER: {
      try {
        const auto type = parse_mission_type(f.payload.at("mission_type").get<std::string>());
        std::string proposal = f.payload.value("proposal_id", "");
        if (proposal.empty() && type == MissionType::M3 &&
            sessions_.at(f.src).descriptor.kind == PlatformKind::human_operator) {
          for (const auto& [pid, p] : gov_.proposals()) {
            if (p.status == "pending") {
              proposal = pid;
              break;
            }
          }
        }
        if (!proposal.empty()) {
          if (!gov_.approve_proposal(proposal, f.src, registry(), now)) {
            error_to(f.src, "stale proposal", Json{{"proposal_id", proposal}});
          }
        } else {
          gov_.trigger_mission(type, f.payload.value("params", Json::object()), f.src, registry(), now, false);
        }
      } catch (const TriggerRejected& e) {
        error_to(f.src, e.what(), Json{{"mission_type", f.payload.value("mission_type", "")}});
      } catch (const std::exception& e) {
        error_to(f.src, std::string("bad trigger: ") + e.what());
      }
      break;
    }
    case FrameType::MISSION_STATUS:
      handle_mission_status(f);
      break;
    case FrameType::CORR_VERDICT: {
      try {
        CorroborationVerdict v;
        v.request_id = f.payload.at("request_id").get<std::string>();
        v.verdict = parse_verdict(f.payload.at("verdict").get<std::string>());
        v.verifier = f.src;
        v.tick = now;
        const auto r = gov_.submit_verdict(v, registry(), now);
        if (!r.accepted) error_to(f.src, r.reason, Json{{"request_id", v.request_id}});
      } catch (const std::exception& e) {
        error_to(f.src, std::string("bad verdict: ") + e.what());
      }
      break;
    }
    case FrameType::COMMAND: {
      const std::string verb = f.payload.value("verb", "");
      if (verb == "dismiss_proposal") {
        if (!gov_.dismiss_proposal(f.payload.value("proposal_id", ""))) error_to(f.src, "stale proposal");
      } else {
        error_to(f.src, "unsupported command", Json{{"verb", verb}});
      }
      break;
    }
    case FrameType::BYE:
      close_session(f.src, "bye");
      break;
    case FrameType::HELLO:
      error_to(f.src, "already registered");
      break;
    default:
      error_to(f.src, "unexpected frame type", Json{{"type", proto::to_string(f.type)}});
      break;
  }
}

void Hub::handle_mission_status(const Frame& f) {
  const Tick now = world_.tick;
  const std::string ev = f.payload.value("event", "");
  if (ev.empty()) {
    error_to(f.src, "missing event");
    return;
  }
  std::optional<std::string> mission;
  if (f.payload.contains("mission_id") && f.payload["mission_id"].is_string()) {
    mission = f.payload["mission_id"].get<std::string>();
  } else if (ev == "swap_complete") {
    mission = gov_.mission_for_beneficiary(f.src);
  } else {
    mission = gov_.active_mission_for(f.src);
  }
  if (!mission) {
    if (ev != "swap_complete") error_to(f.src, "no active mission", Json{{"event", ev}});
    return;
  }
  const MissionInstance* m = gov_.find_mission(*mission);
  if (!m) {
    error_to(f.src, "unknown mission", Json{{"mission_id", *mission}});
    return;
  }
  const bool is_executor = m->executor == f.src;
  const bool is_beneficiary = m->beneficiary && *m->beneficiary == f.src;
  if (!is_executor && !is_beneficiary) {
    error_to(f.src, "not a participant", Json{{"mission_id", *mission}});
    return;
  }
  // A swap may finish without an assisting mission waiting for it.
  if (ev == "swap_complete" && m->state != "SwapInProgress") return;

  Json evidence = f.payload;
  if (ev == "battery_detected" || ev == "partner_detected") {
    auto d = detections_.find(f.src);
    if (d != detections_.end()) {
      evidence["detection"] = d->second;
    } else {
      evidence.erase("detection");
    }
  }
  const auto r = gov_.advance(*mission, ev, now, evidence);
  if (r.violation) {
    error_to(f.src, *r.violation, Json{{"mission_id", *mission}});
  } else if (r.rejection) {
    error_to(f.src, *r.rejection, Json{{"mission_id", *mission}, {"event", ev}});
  }
}

void Hub::flush_effects() {
  for (auto& effect : gov_.take_effects()) {
    std::visit(
        [&](auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, gov::StatusChanged>) {
            Json payload{{"mission_id", e.mission.mission_id},
                         {"mission_type", to_string(e.mission.mission_type)},
                         {"state", e.mission.state},
                         {"previous_state", e.previous_state},
                         {"event", e.event},
                         {"cause", e.cause},
                         {"executor", e.mission.executor},
                         {"participants", e.mission.participants},
                         {"evidence", e.evidence}};
            payload["beneficiary"] = e.mission.beneficiary ? Json(*e.mission.beneficiary) : Json(nullptr);
            emit(FrameType::MISSION_STATUS, proto::kBroadcast, std::move(payload));
          } else if constexpr (std::is_same_v<T, gov::CommandOut>) {
            emit(FrameType::COMMAND, e.dst, e.payload);
          } else if constexpr (std::is_same_v<T, gov::RequestOut>) {
            for (const auto& c : e.request.corroborators) emit(FrameType::CORR_REQUEST, c, e.request);
          } else if constexpr (std::is_same_v<T, gov::C3Out>) {
            emit(FrameType::EVENT, proto::kBroadcast, Json{{"c3", e.event}});
          } else {
            emit(FrameType::EVENT, proto::kBroadcast, Json{{"proposal", e.proposal}});
          }
        },
        effect);
  }
}

void Hub::end_tick() {
  const Tick now = world_.tick;
  gov_.on_tick(now, registry());
  flush_effects();
  std::vector<std::string> stale;
  for (const auto& [id, s] : sessions_) {
    if (now > s.last_frame_tick + cfg_.heartbeat_ticks) stale.push_back(id);
  }
  for (const auto& id : stale) close_session(id, "participant lost: heartbeat timeout");
}

sim::StepResult Hub::step_world(const std::vector<sim::Command>& actuation) {
  std::vector<sim::Command> commands;
  commands.swap(pending_sync_);
  commands.insert(commands.end(), actuation.begin(), actuation.end());
  auto result = sim::step(world_, commands);
  world_ = result.world;
  return result;
}

void Hub::shutdown(const std::string& reason) {
  if (shut_down_) return;
  shut_down_ = true;
  emit(FrameType::BYE, proto::kBroadcast, Json{{"reason", reason}});
}

Snapshot Hub::snapshot() const {
  Snapshot s;
  s.tick = world_.tick;
  s.world = world_;
  for (const auto& [id, m] : gov_.missions()) s.missions.push_back(m);
  for (const auto& [id, r] : sessions_) s.sessions.push_back(r);
  for (const auto& [id, p] : gov_.proposals()) s.proposals.push_back(p);
  for (const auto& [id, r] : gov_.requests()) {
    if (r.resolution.empty()) s.open_requests.push_back(r.request);
  }
  s.telemetry = telemetry_;
  s.detections = detections_;
  return s;
}

}  // namespace fleet::hub
