#include "fleet/governance.hpp"

#include <algorithm>
#include <deque>

namespace fleet::gov {
namespace {

void add(MissionDefinition& d, const std::string& from, const std::string& ev, const std::string& to) {
  d.transitions[{from, ev}] = to;
}

// Every non-terminal state may fault, lose a participant, or be aborted by a
// protocol violation.
void add_universal_aborts(MissionDefinition& d) {
  for (const auto& s : d.states()) {
    if (d.is_terminal(s)) continue;
    add(d, s, event::fault, state::aborted);
    add(d, s, event::participant_lost, state::aborted);
    add(d, s, event::protocol_violation, state::aborted);
  }
}

bool is_gated(const std::string& ev) { return ev == "battery_detected" || ev == "partner_detected"; }

}  // namespace

std::optional<std::string> MissionDefinition::next(const std::string& from, const std::string& ev) const {
  auto it = transitions.find({from, ev});
  if (it == transitions.end()) return std::nullopt;
  return it->second;
}

bool MissionDefinition::has_edge(const std::string& from, const std::string& to) const {
  return std::any_of(transitions.begin(), transitions.end(),
                     [&](const auto& t) { return t.first.first == from && t.second == to; });
}

std::set<std::string> MissionDefinition::states() const {
  std::set<std::string> out{initial_state};
  out.insert(terminal_states.begin(), terminal_states.end());
  for (const auto& [key, to] : transitions) {
    out.insert(key.first);
    out.insert(to);
  }
  return out;
}

std::set<std::string> MissionDefinition::events() const {
  std::set<std::string> out;
  for (const auto& [key, to] : transitions) out.insert(key.second);
  for (const auto& [s, rule] : timeouts) out.insert(rule.event);
  for (const auto& [s, rule] : retries) {
    out.insert(rule.event);
    out.insert(rule.exhausted_event);
  }
  return out;
}

std::vector<std::string> MissionDefinition::validate() const {
  std::vector<std::string> problems;
  bool initial_has_successor = false;
  for (const auto& [key, to] : transitions) {
    if (key.first == initial_state) initial_has_successor = true;
    if (is_terminal(key.first)) problems.push_back("terminal state '" + key.first + "' has a successor");
  }
  if (!initial_has_successor && !is_terminal(initial_state)) {
    problems.push_back("initial state '" + initial_state + "' has no transitions");
  }
  for (const auto& [s, rule] : timeouts) {
    if (!next(s, rule.event)) problems.push_back("timeout event '" + rule.event + "' undefined in '" + s + "'");
  }
  for (const auto& [s, rule] : retries) {
    if (!next(s, rule.exhausted_event)) {
      problems.push_back("retry exhaustion '" + rule.exhausted_event + "' undefined in '" + s + "'");
    }
  }
  // Backward reachability from the terminal states.
  std::set<std::string> reaches(terminal_states.begin(), terminal_states.end());
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [key, to] : transitions) {
      if (reaches.contains(to) && reaches.insert(key.first).second) grew = true;
    }
  }
  for (const auto& s : states()) {
    if (!reaches.contains(s)) problems.push_back("state '" + s + "' cannot reach a terminal state");
  }
  return problems;
}

MissionDefinition default_definition(MissionType type, const GovernanceConfig& cfg) {
  MissionDefinition d;
  d.mission_type = type;
  switch (type) {
    case MissionType::M1:
      add(d, "Triggered", "motors_on", "MotorsOn");
      add(d, "MotorsOn", "stood_up", "Standing");
      add(d, "Standing", "arm_unstowed", "ArmUnstowed");
      add(d, "ArmUnstowed", "trace_started", "ConcurrentTrace");
      add(d, "ConcurrentTrace", "trace_done", "AwaitCorroboration");
      add(d, "AwaitCorroboration", "corroborated", state::completed);
      add(d, "AwaitCorroboration", "corroboration_timeout", state::unverified);
      add(d, "AwaitCorroboration", "corroboration_denied", state::aborted);
      d.timeouts["AwaitCorroboration"] = {cfg.corroboration_deadline, "corroboration_timeout"};
      d.roles = {"executor", "corroborators"};
      break;
    case MissionType::M2:
      add(d, "Triggered", "route_started", "Waypoint");
      add(d, "Waypoint", "waypoint_reached", "Waypoint");
      add(d, "Waypoint", "route_complete", "AwaitFinalCorroboration");
      add(d, "Waypoint", "checkpoint_denied", state::aborted);
      add(d, "AwaitFinalCorroboration", "corroborated", state::completed);
      add(d, "AwaitFinalCorroboration", "partially_corroborated", state::unverified);
      add(d, "AwaitFinalCorroboration", "corroboration_timeout", state::unverified);
      add(d, "AwaitFinalCorroboration", "corroboration_denied", state::aborted);
      add(d, "AwaitFinalCorroboration", "checkpoint_denied", state::aborted);
      d.timeouts["AwaitFinalCorroboration"] = {cfg.corroboration_deadline, "corroboration_timeout"};
      d.roles = {"executor", "corroborators"};
      break;
    case MissionType::M3:
      add(d, "Triggered", "alert_received", "AlertReceived");
      add(d, "AlertReceived", "approval_requested", "AwaitHITLApproval");
      add(d, "AwaitHITLApproval", "approved", "SearchBattery");
      add(d, "SearchBattery", "battery_detected", "ApproachBox");
      add(d, "SearchBattery", "search_timeout", state::aborted);
      add(d, "ApproachBox", "reached_box", "Grasp");
      add(d, "ApproachBox", "target_lost", "SearchBattery");
      add(d, "Grasp", "grasp_success", "SearchPartner");
      add(d, "Grasp", "grasp_fail", "Grasp");
      add(d, "Grasp", "retries_exhausted", state::aborted);
      add(d, "SearchPartner", "partner_detected", "ApproachPartner");
      add(d, "SearchPartner", "search_timeout", state::aborted);
      add(d, "ApproachPartner", "reached_partner", "Place");
      add(d, "ApproachPartner", "partner_lost", "SearchPartner");
      add(d, "Place", "placed", "SwapInProgress");
      add(d, "SwapInProgress", "swap_complete", state::completed);
      d.timeouts["SearchBattery"] = {cfg.search_timeout, "search_timeout"};
      d.timeouts["SearchPartner"] = {cfg.search_timeout, "search_timeout"};
      d.retries["Grasp"] = {"grasp_fail", cfg.grasp_retries, "retries_exhausted"};
      d.roles = {"executor", "beneficiary", "corroborators"};
      break;
  }
  add_universal_aborts(d);
  if (type == MissionType::M3) {
    // The approval prefix runs inside the trigger call, so no agent event can
    // ever land there.
    for (const char* s : {"Triggered", "AlertReceived", "AwaitHITLApproval"}) {
      for (const char* ev : {event::fault, event::participant_lost, event::protocol_violation}) {
        d.transitions.erase({s, ev});
      }
    }
  }
  return d;
}

std::map<MissionType, MissionDefinition> default_definitions(const GovernanceConfig& cfg) {
  return {{MissionType::M1, default_definition(MissionType::M1, cfg)},
          {MissionType::M2, default_definition(MissionType::M2, cfg)},
          {MissionType::M3, default_definition(MissionType::M3, cfg)}};
}

bool history_is_path(const MissionDefinition& def, const MissionInstance& m) {
  if (m.history.empty() || m.history.front().state != def.initial_state) return false;
  for (std::size_t i = 1; i < m.history.size(); ++i) {
    const auto& prev = m.history[i - 1].state;
    if (def.is_terminal(prev)) return false;
    if (!def.has_edge(prev, m.history[i].state)) return false;
  }
  return m.history.back().state == m.state;
}

Governance::Governance(GovernanceConfig cfg) : Governance(cfg, default_definitions(cfg)) {}

Governance::Governance(GovernanceConfig cfg, std::map<MissionType, MissionDefinition> definitions)
    : cfg_(std::move(cfg)), defs_(std::move(definitions)) {
  for (const auto& [type, def] : default_definitions(cfg_)) defs_.try_emplace(type, def);
}

std::vector<Effect> Governance::take_effects() {
  std::vector<Effect> out;
  out.swap(effects_);
  return out;
}

const MissionInstance* Governance::find_mission(const std::string& id) const {
  auto it = missions_.find(id);
  return it == missions_.end() ? nullptr : &it->second;
}

bool Governance::is_terminal(const MissionInstance& m) const {
  return defs_.at(m.mission_type).is_terminal(m.state);
}

std::optional<std::string> Governance::active_mission_for(const std::string& agent_id) const {
  for (const auto& [id, m] : missions_) {
    if (!is_terminal(m) && m.executor == agent_id) return id;
  }
  return std::nullopt;
}

std::optional<std::string> Governance::mission_for_beneficiary(const std::string& agent_id) const {
  for (const auto& [id, m] : missions_) {
    if (!is_terminal(m) && m.beneficiary == agent_id) return id;
  }
  return std::nullopt;
}

void Governance::emit_c3(C3Kind kind, InteractionPattern pattern, const std::string& initiator,
                         const std::string& responder, const std::optional<std::string>& mission, Tick now,
                         Json detail) {
  auto kind_of = [&](const std::string& id) {
    auto it = kinds_.find(id);
    return it == kinds_.end() ? PlatformKind::human_operator : it->second;
  };
  C3Event e;
  e.event_id = next_event_id_++;
  e.kind = classify_interaction(kind_of(initiator), kind_of(responder), pattern);
  if (e.kind != kind) throw Error("C3 classification mismatch");
  e.initiator = initiator;
  e.responder = responder;
  e.mission = mission;
  e.tick = now;
  detail["pattern"] = to_string(pattern);
  e.detail = std::move(detail);
  effects_.emplace_back(C3Out{std::move(e)});
}

void Governance::command(const MissionInstance& m, Json payload) {
  payload["mission_id"] = m.mission_id;
  effects_.emplace_back(CommandOut{m.executor, std::move(payload)});
}

MissionInstance Governance::trigger_mission(MissionType type, const Json& params, const std::string& initiated_by,
                                            const Registry& registry, Tick now, bool hitl_approval) {
  for (const auto& [id, d] : registry) kinds_[id] = d.kind;
  if (cfg_.disabled.contains(type)) throw TriggerRejected("mission disabled");

  auto first_of = [&](auto pred) -> std::optional<std::string> {
    for (const auto& [id, d] : registry) {
      if (pred(d)) return id;
    }
    return std::nullopt;
  };
  auto all_of_kind = [&](std::initializer_list<PlatformKind> kinds) {
    std::vector<std::string> out;
    for (const auto& [id, d] : registry) {
      if (std::find(kinds.begin(), kinds.end(), d.kind) != kinds.end()) out.push_back(id);
    }
    return out;
  };
  const bool needs_arm = type == MissionType::M3;
  auto executor_ok = [&](const PlatformDescriptor& d) {
    return d.kind == PlatformKind::quadruped && (!needs_arm || d.has_manipulator);
  };

  std::optional<std::string> executor;
  if (params.contains("executor") && params["executor"].is_string()) {
    const auto id = params["executor"].get<std::string>();
    auto it = registry.find(id);
    if (it != registry.end() && executor_ok(it->second)) executor = id;
  } else {
    executor = first_of(executor_ok);
  }
  if (!executor) throw TriggerRejected("missing executor");
  if (active_mission_for(*executor)) throw TriggerRejected("executor busy");

  std::vector<std::string> corroborators;
  if (params.contains("corroborators")) {
    for (const auto& c : params["corroborators"]) {
      const auto id = c.get<std::string>();
      if (!registry.contains(id)) throw TriggerRejected("unknown corroborator '" + id + "'");
      corroborators.push_back(id);
    }
  } else if (type == MissionType::M1) {
    corroborators = all_of_kind({PlatformKind::aerial, PlatformKind::human_operator});
  } else if (type == MissionType::M2) {
    corroborators = all_of_kind({PlatformKind::fixed_camera, PlatformKind::aerial});
  } else {
    corroborators = all_of_kind({PlatformKind::aerial, PlatformKind::fixed_camera, PlatformKind::human_operator});
  }
  if (type != MissionType::M3 && corroborators.empty()) throw TriggerRejected("missing corroborator");

  std::optional<std::string> beneficiary;
  if (type == MissionType::M3) {
    auto beneficiary_ok = [](const PlatformDescriptor& d) {
      return d.kind == PlatformKind::wheeled && d.battery_capable;
    };
    if (params.contains("beneficiary") && params["beneficiary"].is_string()) {
      const auto id = params["beneficiary"].get<std::string>();
      auto it = registry.find(id);
      if (it != registry.end() && beneficiary_ok(it->second)) beneficiary = id;
    } else {
      beneficiary = first_of(beneficiary_ok);
    }
    if (!beneficiary) throw TriggerRejected("missing beneficiary");
    if (mission_for_beneficiary(*beneficiary)) throw TriggerRejected("beneficiary already assisted");
  }

  if (type == MissionType::M2) {
    if (!params.contains("waypoints") || !params["waypoints"].is_array() || params["waypoints"].empty()) {
      throw TriggerRejected("missing waypoints");
    }
    for (const auto& w : params["waypoints"]) {
      if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number()) {
        throw TriggerRejected("malformed waypoint");
      }
    }
  }

  MissionInstance m;
  m.mission_id = std::string(to_string(type)) + "-" + std::to_string(next_mission_++);
  m.mission_type = type;
  m.state = defs_.at(type).initial_state;
  const std::string cause = "triggered by " + initiated_by;
  m.history.push_back({now, m.state, cause});
  m.executor = *executor;
  m.beneficiary = beneficiary;
  m.corroborators = corroborators;
  m.participants.push_back(*executor);
  if (beneficiary) m.participants.push_back(*beneficiary);
  for (const auto& c : corroborators) {
    if (std::find(m.participants.begin(), m.participants.end(), c) == m.participants.end()) {
      m.participants.push_back(c);
    }
  }

  Runtime rt;
  rt.entered = now;
  rt.context = params.is_object() ? params : Json::object();
  rt.context["initiated_by"] = initiated_by;
  rt.context["hitl_approval"] = hitl_approval;
  runtime_[m.mission_id] = rt;
  auto& stored = missions_[m.mission_id] = m;

  effects_.emplace_back(StatusChanged{stored, "", "trigger", cause, Json::object()});
  if (hitl_approval && type == MissionType::M3) {
    emit_c3(C3Kind::corroboration, InteractionPattern::independent_verification, initiated_by, *executor,
            stored.mission_id, now, Json{{"approval_of", "battery_low alert"}, {"beneficiary", *beneficiary}});
  }
  on_enter(stored, "trigger", now, Json::object());
  return missions_.at(m.mission_id);
}

void Governance::transition(MissionInstance& m, const std::string& to, Tick now, const std::string& ev,
                            const std::string& cause, const Json& evidence) {
  const std::string from = m.state;
  m.state = to;
  m.history.push_back({now, to, cause});
  runtime_[m.mission_id].entered = now;
  effects_.emplace_back(StatusChanged{m, from, ev, cause, evidence});
  on_enter(m, ev, now, evidence);
}

AdvanceResult Governance::advance(const std::string& mission_id, const std::string& ev_in, Tick now,
                                  const Json& evidence) {
  auto it = missions_.find(mission_id);
  if (it == missions_.end()) throw Error("unknown mission '" + mission_id + "'");
  MissionInstance& m = it->second;
  const MissionDefinition& def = defs_.at(m.mission_type);
  AdvanceResult r;
  r.from = m.state;
  r.to = m.state;

  if (def.is_terminal(m.state)) {
    r.violation = "mission already terminal";
    return r;
  }

  if (is_gated(ev_in)) {
    const bool partner = ev_in == "partner_detected";
    bool ok = evidence.is_object() && evidence.contains("detection") && evidence.at("detection").is_object();
    if (ok) {
      const Json& d = evidence.at("detection");
      ok = d.value("confidence", 0.0) >= cfg_.detection_threshold &&
           d.value("target_class", "") == (partner ? "wheeled_platform" : "battery_box");
      if (ok && partner && m.beneficiary) ok = d.value("target_id", "") == *m.beneficiary;
    }
    if (!ok) {
      r.rejection = "threshold gate";
      return r;
    }
  }

  std::string ev = ev_in;
  std::string cause = ev_in;
  if (auto rr = def.retries.find(m.state); rr != def.retries.end() && rr->second.event == ev) {
    int& count = runtime_[mission_id].retry_counts[ev];
    ++count;
    if (count >= rr->second.limit) {
      ev = rr->second.exhausted_event;
      cause = ev_in + " #" + std::to_string(count) + " (" + ev + ")";
    } else {
      cause = ev_in + " #" + std::to_string(count);
    }
  }

  auto to = def.next(m.state, ev);
  if (!to) {
    const std::string why = "protocol violation: undefined event '" + ev + "' in state '" + m.state + "'";
    transition(m, state::aborted, now, event::protocol_violation, why, evidence);
    r.to = state::aborted;
    r.violation = why;
    return r;
  }
  transition(m, *to, now, ev, cause, evidence);
  r.accepted = true;
  r.to = *to;
  return r;
}

void Governance::on_enter(MissionInstance& m, const std::string& ev, Tick now, const Json& evidence) {
  const std::string id = m.mission_id;
  Runtime& rt = runtime_[id];
  const std::string s = m.state;

  if (defs_.at(m.mission_type).is_terminal(s)) {
    command(m, Json{{"verb", "hold"}});
    for (auto& [rid, req] : requests_) {
      if (req.request.mission_id == id && req.resolution.empty()) req.resolution = "closed";
    }
    return;
  }

  auto open_request = [&](const std::string& step, const std::string& quorum, const std::string& purpose) {
    CorroborationRequest req;
    req.request_id = "R-" + std::to_string(next_request_++);
    req.mission_id = id;
    req.subject = Json{{"agent", m.executor}, {"step", step}};
    req.corroborators = m.corroborators;
    req.deadline_tick = now + cfg_.corroboration_deadline;
    req.quorum = quorum;
    requests_[req.request_id] = OpenRequest{req, purpose, {}, ""};
    if (purpose == "final") {
      rt.final_request = req.request_id;
    } else {
      rt.checkpoint_requests.push_back(req.request_id);
    }
    effects_.emplace_back(RequestOut{req});
  };

  switch (m.mission_type) {
    case MissionType::M1:
      if (s == "Triggered") {
        command(m, Json{{"verb", "stand"}});
      } else if (s == "Standing") {
        command(m, Json{{"verb", "unstow"}});
      } else if (s == "ArmUnstowed") {
        command(m, Json{{"verb", "trace"},
                        {"circle_radius", cfg_.trace_radius},
                        {"square_side", cfg_.trace_side},
                        {"samples", cfg_.trace_samples}});
      } else if (s == "AwaitCorroboration") {
        open_request("systems_check", "all", "final");
      }
      break;
    case MissionType::M2:
      if (s == "Triggered") {
        command(m, Json{{"verb", "goto"}, {"waypoints", rt.context.at("waypoints")}});
      } else if (s == "Waypoint" && ev == "waypoint_reached") {
        const auto index = evidence.value("waypoint", Json(rt.checkpoint_requests.size()));
        open_request("checkpoint " + index.dump(), "any", "checkpoint");
      } else if (s == "AwaitFinalCorroboration") {
        open_request("route_complete", "any", "final");
      }
      break;
    case MissionType::M3:
      if (s == "Triggered") {
        advance(id, "alert_received", now, Json::object());
      } else if (s == "AlertReceived") {
        advance(id, "approval_requested", now, Json::object());
      } else if (s == "AwaitHITLApproval") {
        // The trigger itself is the approval: an operator tab press or the
        // auto-approve policy.
        advance(id, "approved", now, Json{{"approved_by", rt.context.value("initiated_by", "hub")}});
      } else if (s == "SearchBattery") {
        command(m, Json{{"verb", "scan"}, {"target_class", "battery_box"}});
      } else if (s == "ApproachBox") {
        rt.context["box_id"] = evidence.at("detection").at("target_id");
        command(m, Json{{"verb", "approach"}, {"target_id", rt.context["box_id"]}});
      } else if (s == "Grasp") {
        command(m, Json{{"verb", "grasp"}, {"object_id", rt.context.value("box_id", "")}});
      } else if (s == "SearchPartner") {
        command(m, Json{{"verb", "scan"}, {"target_class", "wheeled_platform"}, {"target_id", *m.beneficiary}});
      } else if (s == "ApproachPartner") {
        command(m, Json{{"verb", "deliver"}, {"partner_id", *m.beneficiary}, {"offset", cfg_.placement_offset}});
      } else if (s == "Place") {
        command(m, Json{{"verb", "release"}, {"partner_id", *m.beneficiary}});
      } else if (s == "SwapInProgress") {
        emit_c3(C3Kind::collaboration, InteractionPattern::assistance_on_fault, m.executor, *m.beneficiary, id, now,
                Json{{"placement", evidence.value("placement", Json())},
                     {"partner_pose", evidence.value("partner_pose", Json())}});
      }
      break;
  }
}

CorroborationRequest Governance::request_corroboration(const std::string& mission_id, const Json& subject,
                                                       const std::vector<std::string>& corroborators,
                                                       Tick deadline_ticks, Tick now, const Registry& registry,
                                                       const std::string& quorum, const std::string& purpose) {
  if (corroborators.empty()) throw CorroborationRejected("empty corroborator set");
  for (const auto& c : corroborators) {
    if (!registry.contains(c)) throw CorroborationRejected("unregistered corroborator '" + c + "'");
  }
  if (quorum != "all" && quorum != "any") throw CorroborationRejected("unknown quorum '" + quorum + "'");
  auto it = missions_.find(mission_id);
  if (it == missions_.end()) throw CorroborationRejected("unknown mission '" + mission_id + "'");
  for (const auto& [id, d] : registry) kinds_[id] = d.kind;

  CorroborationRequest req;
  req.request_id = "R-" + std::to_string(next_request_++);
  req.mission_id = mission_id;
  req.subject = subject;
  req.corroborators = corroborators;
  req.deadline_tick = now + deadline_ticks;
  req.quorum = quorum;
  requests_[req.request_id] = OpenRequest{req, purpose, {}, ""};
  Runtime& rt = runtime_[mission_id];
  if (purpose == "final") {
    rt.final_request = req.request_id;
  } else {
    rt.checkpoint_requests.push_back(req.request_id);
  }
  effects_.emplace_back(RequestOut{req});
  return req;
}

VerdictResult Governance::submit_verdict(const CorroborationVerdict& v, const Registry& registry, Tick now) {
  for (const auto& [id, d] : registry) kinds_[id] = d.kind;
  auto it = requests_.find(v.request_id);
  if (it == requests_.end()) return {false, "no open request"};
  OpenRequest& r = it->second;
  if (r.resolution == "expired" || r.resolution == "closed" || now > r.request.deadline_tick) {
    return {false, "expired"};
  }
  const auto& cs = r.request.corroborators;
  if (std::find(cs.begin(), cs.end(), v.verifier) == cs.end()) return {false, "not a corroborator"};
  if (r.verdicts.contains(v.verifier)) return {false, "duplicate verdict"};
  r.verdicts[v.verifier] = v.verdict;

  const std::string subject = r.request.subject.value("agent", "");
  emit_c3(C3Kind::corroboration, InteractionPattern::independent_verification, v.verifier, subject,
          r.request.mission_id, now,
          Json{{"request_id", v.request_id},
               {"verdict", to_string(v.verdict)},
               {"step", r.request.subject.value("step", "")}});

  if (r.resolution.empty()) {
    std::size_t confirmed = 0;
    std::size_t denied = 0;
    for (const auto& [who, verdict] : r.verdicts) {
      (verdict == Verdict::confirmed ? confirmed : denied)++;
    }
    std::string res;
    if (r.request.quorum == "all") {
      if (denied > 0) {
        res = "denied";
      } else if (confirmed == cs.size()) {
        res = "confirmed";
      }
    } else {
      if (confirmed > 0) {
        res = "confirmed";
      } else if (denied == cs.size()) {
        res = "denied";
      }
    }
    if (!res.empty()) resolve_request(r, res, now);
  }
  return {true, ""};
}

void Governance::resolve_request(OpenRequest& r, const std::string& resolution, Tick now) {
  r.resolution = resolution;
  auto it = missions_.find(r.request.mission_id);
  if (it == missions_.end() || is_terminal(it->second)) return;
  const std::string mission_id = it->first;
  const Json evidence{{"request_id", r.request.request_id}, {"resolution", resolution}};
  if (r.purpose == "checkpoint") {
    if (resolution == "denied") advance(mission_id, "checkpoint_denied", now, evidence);
    return;
  }
  if (resolution == "denied") {
    advance(mission_id, "corroboration_denied", now, evidence);
  } else if (resolution == "confirmed") {
    bool all_checkpoints = true;
    for (const auto& cp : runtime_[mission_id].checkpoint_requests) {
      if (requests_.at(cp).resolution != "confirmed") all_checkpoints = false;
    }
    advance(mission_id, all_checkpoints ? "corroborated" : "partially_corroborated", now, evidence);
  }
}

std::optional<Proposal> Governance::handle_alert(const std::string& agent_id, const Json& alert,
                                                 const Registry& registry, Tick now) {
  for (const auto& [id, d] : registry) kinds_[id] = d.kind;
  auto it = registry.find(agent_id);
  if (it == registry.end() || !it->second.battery_capable) {
    throw Error("alert from unregistered or non battery-capable agent '" + agent_id + "'");
  }
  if (mission_for_beneficiary(agent_id)) return std::nullopt;
  for (const auto& [pid, p] : proposals_) {
    if (p.beneficiary == agent_id && (p.status == "pending" || p.status == "approved")) return std::nullopt;
  }

  Proposal p;
  p.proposal_id = "P-" + std::to_string(next_proposal_++);
  p.beneficiary = agent_id;
  p.raised_tick = now;
  p.alert = alert;
  for (const auto& [id, d] : registry) {
    if (d.kind == PlatformKind::quadruped && d.has_manipulator) {
      p.helper = id;
      break;
    }
  }
  if (cfg_.disabled.contains(MissionType::M3)) {
    p.feasible = false;
    p.reason = "mission disabled";
    p.status = "infeasible";
  } else if (!p.helper) {
    p.feasible = false;
    p.reason = "no manipulator-capable agent";
    p.status = "infeasible";
  } else {
    p.feasible = true;
    p.status = "pending";
  }
  auto& stored = proposals_[p.proposal_id] = p;
  effects_.emplace_back(ProposalOut{stored});
  if (stored.feasible && cfg_.auto_approve) {
    stored.status = "approved";
    try_trigger(stored, registry, now, "hub");
  }
  return proposals_.at(p.proposal_id);
}

void Governance::try_trigger(Proposal& p, const Registry& registry, Tick now, const std::string& approver) {
  Json params{{"beneficiary", p.beneficiary}};
  if (p.helper) params["executor"] = *p.helper;
  try {
    const auto m = trigger_mission(MissionType::M3, params, approver, registry, now, approver == "operator");
    p.status = "triggered";
    p.mission_id = m.mission_id;
    effects_.emplace_back(ProposalOut{p});
  } catch (const TriggerRejected& e) {
    if (std::string(e.what()) == "executor busy") return;  // retried on a later tick
    p.status = "infeasible";
    p.feasible = false;
    p.reason = e.what();
    effects_.emplace_back(ProposalOut{p});
  }
}

bool Governance::approve_proposal(const std::string& proposal_id, const std::string& approver,
                                  const Registry& registry, Tick now) {
  auto it = proposals_.find(proposal_id);
  if (it == proposals_.end() || it->second.status != "pending") return false;
  it->second.status = "approved";
  it->second.alert["approved_by"] = approver;
  try_trigger(it->second, registry, now, approver);
  return true;
}

bool Governance::dismiss_proposal(const std::string& proposal_id) {
  auto it = proposals_.find(proposal_id);
  if (it == proposals_.end() || it->second.status != "pending") return false;
  it->second.status = "dismissed";
  effects_.emplace_back(ProposalOut{it->second});
  return true;
}

void Governance::on_tick(Tick now, const Registry& registry) {
  for (const auto& [id, d] : registry) kinds_[id] = d.kind;
  for (auto& [rid, r] : requests_) {
    if (r.resolution.empty() && now > r.request.deadline_tick) r.resolution = "expired";
  }
  std::vector<std::string> ids;
  for (const auto& [id, m] : missions_) ids.push_back(id);
  for (const auto& id : ids) {
    const MissionInstance& m = missions_.at(id);
    if (is_terminal(m)) continue;
    const auto& def = defs_.at(m.mission_type);
    auto rule = def.timeouts.find(m.state);
    if (rule == def.timeouts.end()) continue;
    if (now > runtime_[id].entered + rule->second.ticks) advance(id, rule->second.event, now, Json::object());
  }
  for (auto& [pid, p] : proposals_) {
    if (p.status == "approved") try_trigger(p, registry, now, p.alert.value("approved_by", "hub"));
  }
}

void Governance::participant_lost(const std::string& agent_id, Tick now) {
  std::vector<std::string> ids;
  for (const auto& [id, m] : missions_) {
    if (is_terminal(m)) continue;
    if (std::find(m.participants.begin(), m.participants.end(), agent_id) != m.participants.end()) {
      ids.push_back(id);
    }
  }
  for (const auto& id : ids) advance(id, event::participant_lost, now, Json{{"agent", agent_id}});
}

void Governance::on_follow(const std::string& follower, const std::string& target, const Registry& registry,
                           Tick now) {
  for (const auto& [id, d] : registry) kinds_[id] = d.kind;
  auto mission = active_mission_for(target);
  if (!mission) return;
  Json& cooperating = runtime_[*mission].context["cooperating"];
  if (!cooperating.is_array()) cooperating = Json::array();
  for (const auto& f : cooperating) {
    if (f == follower) return;
  }
  cooperating.push_back(follower);
  emit_c3(C3Kind::cooperation, InteractionPattern::joint_task_step, follower, target, *mission, now,
          Json{{"action", "follow"}});
}

void to_json(Json& j, const MissionDefinition& v) {
  Json transitions = Json::array();
  for (const auto& [key, to] : v.transitions) {
    transitions.push_back(Json{{"from", key.first}, {"event", key.second}, {"to", to}});
  }
  Json timeouts = Json::object();
  for (const auto& [s, rule] : v.timeouts) timeouts[s] = Json{{"ticks", rule.ticks}, {"event", rule.event}};
  Json retries = Json::object();
  for (const auto& [s, rule] : v.retries) {
    retries[s] = Json{{"event", rule.event}, {"limit", rule.limit}, {"exhausted_event", rule.exhausted_event}};
  }
  j = Json{{"mission_type", to_string(v.mission_type)},
           {"initial_state", v.initial_state},
           {"terminal_states", v.terminal_states},
           {"transitions", transitions},
           {"timeouts", timeouts},
           {"retries", retries},
           {"roles", v.roles}};
}

void from_json(const Json& j, MissionDefinition& v) {
  v = MissionDefinition{};
  v.mission_type = parse_mission_type(j.at("mission_type").get<std::string>());
  v.initial_state = j.value("initial_state", std::string(state::triggered));
  if (j.contains("terminal_states")) v.terminal_states = j.at("terminal_states").get<std::set<std::string>>();
  for (const auto& t : j.at("transitions")) {
    v.transitions[{t.at("from").get<std::string>(), t.at("event").get<std::string>()}] = t.at("to").get<std::string>();
  }
  if (j.contains("timeouts")) {
    for (const auto& [s, rule] : j.at("timeouts").items()) {
      v.timeouts[s] = {rule.at("ticks").get<Tick>(), rule.at("event").get<std::string>()};
    }
  }
  if (j.contains("retries")) {
    for (const auto& [s, rule] : j.at("retries").items()) {
      v.retries[s] = {rule.at("event").get<std::string>(), rule.at("limit").get<int>(),
                      rule.at("exhausted_event").get<std::string>()};
    }
  }
  v.roles = j.value("roles", std::vector<std::string>{});
}

void to_json(Json& j, const Proposal& v) {
  j = Json{{"proposal_id", v.proposal_id},
           {"beneficiary", v.beneficiary},
           {"feasible", v.feasible},
           {"reason", v.reason},
           {"status", v.status},
           {"raised_tick", v.raised_tick},
           {"alert", v.alert}};
  j["helper"] = v.helper ? Json(*v.helper) : Json(nullptr);
  j["mission_id"] = v.mission_id ? Json(*v.mission_id) : Json(nullptr);
}

void to_json(Json& j, const GovernanceConfig& v) {
  std::vector<std::string> disabled;
  for (auto t : v.disabled) disabled.emplace_back(to_string(t));
  j = Json{{"detection_threshold", v.detection_threshold},
           {"grasp_retries", v.grasp_retries},
           {"search_timeout", v.search_timeout},
           {"corroboration_deadline", v.corroboration_deadline},
           {"auto_approve", v.auto_approve},
           {"disabled", disabled},
           {"trace_radius", v.trace_radius},
           {"trace_side", v.trace_side},
           {"trace_samples", v.trace_samples},
           {"placement_offset", v.placement_offset}};
}

}  // namespace fleet::gov
