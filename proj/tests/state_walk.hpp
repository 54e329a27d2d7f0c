#pragma once
// Drives fresh governance instances into every resting state of a mission
// graph and probes one (state, event) pair at a time.

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fleet/governance.hpp"
#include "support.hpp"

namespace fleet::testing {

inline gov::Registry full_registry() {
  return {{"Q1", quadruped()}, {"W1", wheeled()}, {"A1", aerial()}, {"CAM1", fixed_camera()}, {"operator", human()}};
}

inline Json trigger_params(MissionType t) {
  if (t == MissionType::M2) return Json{{"waypoints", {{4, 1}, {4, 7}}}};
  return Json::object();
}

/// Evidence an agent would attach to `event`; gated events carry a detection
/// that clears the threshold.
inline Json evidence_for(const std::string& event) {
  if (event == "battery_detected") {
    return Json{{"detection",
                 {{"target_class", "battery_box"}, {"target_id", "box-1"}, {"confidence", 0.9}, {"range", 2.0},
                  {"bearing", 0.0}, {"camera_id", "front-left"}, {"tick", 0}}}};
  }
  if (event == "partner_detected") {
    return Json{{"detection",
                 {{"target_class", "wheeled_platform"}, {"target_id", "W1"}, {"confidence", 0.9}, {"range", 2.0},
                  {"bearing", 0.0}, {"camera_id", "front-left"}, {"tick", 0}}}};
  }
  if (event == "waypoint_reached") return Json{{"waypoint", 0}};
  return Json::object();
}

struct Walker {
  MissionType type;
  gov::GovernanceConfig cfg;

  struct Live {
    gov::Governance g;
    std::string id;
  };

  Live start() const {
    Live l{gov::Governance(cfg), ""};
    l.id = l.g.trigger_mission(type, trigger_params(type), "operator", full_registry(), 0).mission_id;
    return l;
  }

  std::string resting_state() const {
    auto l = start();
    return l.g.find_mission(l.id)->state;
  }

  /// Shortest event sequence from the resting start to every reachable state.
  std::map<std::string, std::vector<std::string>> paths() const {
    const auto def = gov::default_definitions(cfg).at(type);
    std::map<std::string, std::vector<std::string>> out{{resting_state(), {}}};
    std::deque<std::string> queue{resting_state()};
    while (!queue.empty()) {
      const std::string s = queue.front();
      queue.pop_front();
      if (def.is_terminal(s)) continue;
      for (const auto& [key, to] : def.transitions) {
        if (key.first != s || out.contains(to)) continue;
        auto p = out.at(s);
        p.push_back(key.second);
        out[to] = p;
        queue.push_back(to);
      }
    }
    return out;
  }

  /// A live instance sitting in `state`, or nothing when unreachable.
  std::optional<Live> drive_to(const std::string& state) const {
    const auto all = paths();
    auto it = all.find(state);
    if (it == all.end()) return std::nullopt;
    Live l = start();
    Tick now = 0;
    for (const auto& ev : it->second) l.g.advance(l.id, ev, ++now, evidence_for(ev));
    if (l.g.find_mission(l.id)->state != state) return std::nullopt;
    return l;
  }
};

struct PairOutcome {
  std::string state;
  std::string event;
  std::optional<std::string> expected;  // defined successor, if any
  std::string reached;
  bool ok = false;
  std::string note;
};

/// Every event known to any mission graph, plus an unknown token.
inline std::set<std::string> event_universe(const gov::GovernanceConfig& cfg) {
  std::set<std::string> out{"no_such_event"};
  for (const auto& [t, def] : gov::default_definitions(cfg)) {
    const auto e = def.events();
    out.insert(e.begin(), e.end());
  }
  return out;
}

/// Probes (state, event) for every non-terminal resting state.
inline std::vector<PairOutcome> enumerate_pairs(MissionType type, const gov::GovernanceConfig& cfg = {}) {
  const Walker w{type, cfg};
  const auto def = gov::default_definitions(cfg).at(type);
  std::vector<PairOutcome> out;
  for (const auto& [state, path] : w.paths()) {
    if (def.is_terminal(state)) continue;
    for (const auto& ev : event_universe(cfg)) {
      auto live = w.drive_to(state);
      PairOutcome o{state, ev, def.next(state, ev), "", false, ""};
      // A counted retry stays put until its limit.
      if (auto rr = def.retries.find(state); rr != def.retries.end() && rr->second.event == ev) {
        o.expected = rr->second.limit > 1 ? def.next(state, ev) : def.next(state, rr->second.exhausted_event);
      }
      const auto r = live->g.advance(live->id, ev, 1000, evidence_for(ev));
      const auto& m = *live->g.find_mission(live->id);
      o.reached = m.state;
      if (o.expected) {
        o.ok = r.accepted && m.state == *o.expected;
      } else {
        o.ok = !r.accepted && m.state == gov::state::aborted && r.violation &&
               m.history.back().cause.find("protocol violation") != std::string::npos;
        o.note = m.history.back().cause;
      }
      out.push_back(o);
    }
  }
  return out;
}

/// Defined edges never exercised by the pair probe or a fresh trigger.
inline std::vector<std::string> unexercised_edges(MissionType type, const gov::GovernanceConfig& cfg = {}) {
  const Walker w{type, cfg};
  const auto def = gov::default_definitions(cfg).at(type);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& o : enumerate_pairs(type, cfg)) {
    if (o.expected && o.ok) seen.insert({o.state, o.event});
  }
  // Edges crossed inside the trigger call show up in the fresh history.
  auto l = w.start();
  const auto& h = l.g.find_mission(l.id)->history;
  for (std::size_t i = 1; i < h.size(); ++i) {
    for (const auto& [key, to] : def.transitions) {
      if (key.first == h[i - 1].state && to == h[i].state && h[i].cause == key.second) seen.insert(key);
    }
  }
  // Retry exhaustion is reached by repeating the counted event.
  for (const auto& [s, rule] : def.retries) {
    auto live = w.drive_to(s);
    if (!live) continue;
    for (int i = 0; i < rule.limit; ++i) live->g.advance(live->id, rule.event, 1000 + i, evidence_for(rule.event));
    if (live->g.find_mission(live->id)->state == def.next(s, rule.exhausted_event)) seen.insert({s, rule.exhausted_event});
  }
  std::vector<std::string> missing;
  for (const auto& [key, to] : def.transitions) {
    if (!seen.contains(key)) missing.push_back(key.first + " --" + key.second + "--> " + to);
  }
  return missing;
}

}  // namespace fleet::testing
