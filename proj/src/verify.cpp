#include "fleet/verify.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "fleet/error.hpp"
#include "fleet/event_log.hpp"
#include "fleet/governance.hpp"
#include "fleet/protocol.hpp"

namespace fleet {

namespace {

constexpr double kPlacementTolerance = 0.1;

struct MissionTrack {
  std::string type;
  std::string state;
  std::string executor;
  bool terminal = false;
};

struct RequestTrack {
  std::string quorum = "all";
  std::set<std::string> corroborators;
  std::set<std::string> confirmed;
};

}  // namespace

bool VerifyResult::has(const std::string& kind) const {
  for (const auto& v : violations) {
    if (v.kind == kind) return true;
  }
  return false;
}

VerifyResult verify_lines(const std::vector<std::string>& lines, const std::optional<std::string>& digest) {
  VerifyResult out;
  out.lines = lines.size();
  auto flag = [&](std::size_t offset, std::string kind, std::string detail) {
    out.violations.push_back({offset, std::move(kind), std::move(detail)});
  };

  Sha256 hash;
  for (const auto& l : lines) {
    hash.update(l);
    hash.update("\n");
  }
  if (!digest) {
    flag(lines.size(), "hash", "missing digest");
  } else if (hash.hex() != *digest) {
    flag(lines.size(), "hash", "digest mismatch: log hashes to " + hash.hex());
  }

  std::map<MissionType, gov::MissionDefinition> defs = gov::default_definitions();
  double threshold = kDefaultDetectionThreshold;
  double offset = 2.0;
  std::map<std::string, std::uint64_t> seq;
  Tick last_tick = 0;
  std::map<std::string, MissionTrack> missions;
  std::map<std::string, Detection> last_detection;
  std::map<std::string, Pose2D> last_pose;
  std::map<std::string, RequestTrack> requests;
  std::uint64_t next_c3 = 1;
  bool saw_bye = false;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    proto::Frame f;
    try {
      f = proto::decode_frame(lines[i]);
    } catch (const std::exception& e) {
      flag(i, "format", e.what());
      continue;
    }
    if (proto::encode_frame(f) != lines[i]) flag(i, "format", "line is not in canonical form");
    if (saw_bye) flag(i, "format", "record after the closing BYE");

    auto& s = seq[f.src];
    if (f.seq != s + 1) {
      flag(i, "seq gap", f.src + " jumped from " + std::to_string(s) + " to " + std::to_string(f.seq));
    }
    s = f.seq;
    if (f.tick < last_tick) flag(i, "tick order", "tick " + std::to_string(f.tick) + " after " + std::to_string(last_tick));
    last_tick = std::max(last_tick, f.tick);

    const Json& p = f.payload;
    const bool from_hub = f.src == proto::kHub;

    if (i == 0) {
      if (!from_hub || f.type != proto::FrameType::EVENT || !p.contains("config")) {
        flag(i, "format", "first record is not the hub configuration");
      } else {
        try {
          const Json& cfg = p["config"];
          threshold = cfg.at("governance").value("detection_threshold", threshold);
          offset = cfg.at("governance").value("placement_offset", offset);
          for (const auto& d : cfg.value("mission_definitions", Json::array())) {
            auto def = d.get<gov::MissionDefinition>();
            defs[def.mission_type] = def;
          }
        } catch (const std::exception& e) {
          flag(i, "format", std::string("bad configuration: ") + e.what());
        }
      }
      continue;
    }

    try {
      switch (f.type) {
        case proto::FrameType::DETECTION:
          if (p.contains("detection")) last_detection[f.src] = p["detection"].get<Detection>();
          break;
        case proto::FrameType::TELEMETRY:
          if (p.contains("pose")) last_pose[f.src] = p["pose"].get<Pose2D>();
          break;
        case proto::FrameType::CORR_REQUEST:
          if (from_hub) {
            auto& r = requests[p.at("request_id").get<std::string>()];
            r.quorum = p.value("quorum", "all");
            for (const auto& c : p.at("corroborators")) r.corroborators.insert(c.get<std::string>());
          }
          break;
        case proto::FrameType::EVENT:
          if (from_hub && p.contains("c3")) {
            const Json& ev = p["c3"];
            const auto id = ev.at("event_id").get<std::uint64_t>();
            if (id != next_c3) flag(i, "c3 order", "event_id " + std::to_string(id) + ", expected " + std::to_string(next_c3));
            next_c3 = id + 1;
            if (ev.at("kind") == "corroboration") {
              const Json detail = ev.value("detail", Json::object());
              if (detail.value("verdict", "") == "confirmed") {
                requests[detail.value("request_id", "")].confirmed.insert(ev.at("initiator").get<std::string>());
              }
            }
          }
          break;
        case proto::FrameType::BYE:
          if (from_hub) saw_bye = true;
          break;
        case proto::FrameType::MISSION_STATUS: {
          if (!from_hub) break;
          const std::string id = p.at("mission_id").get<std::string>();
          const std::string type = p.at("mission_type").get<std::string>();
          const std::string state = p.at("state").get<std::string>();
          const std::string event = p.at("event").get<std::string>();
          const auto& def = defs.at(parse_mission_type(type));
          auto it = missions.find(id);
          if (it == missions.end()) {
            if (event != "trigger" || state != def.initial_state) {
              flag(i, "state machine", id + " does not start in " + def.initial_state);
            }
            missions[id] = MissionTrack{type, state, p.value("executor", ""), def.is_terminal(state)};
            break;
          }
          MissionTrack& m = it->second;
          if (m.terminal) {
            flag(i, "state machine", id + " changed after reaching " + m.state);
          }
          const std::string prev = p.value("previous_state", "");
          if (prev != m.state) flag(i, "state machine", id + " previous_state " + prev + " but replay is in " + m.state);
          const auto next = def.next(m.state, event);
          if (!next || *next != state) {
            flag(i, "state machine", id + ": " + m.state + " --" + event + "--> " + state + " is not a defined transition");
          }
          if (state == "ApproachBox" || state == "ApproachPartner") {
            const TargetClass want = state == "ApproachBox" ? TargetClass::battery_box : TargetClass::wheeled_platform;
            auto d = last_detection.find(m.executor);
            const bool ok = d != last_detection.end() && d->second.confidence >= threshold &&
                            d->second.target_class == want;
            if (!ok) flag(i, "threshold gate", id + " entered " + state + " without a qualifying detection");
          }
          if (event == "placed") {
            const Json ev = p.value("evidence", Json::object());
            const std::string partner = p.value("beneficiary", Json()).is_string() ? p["beneficiary"].get<std::string>() : "";
            std::optional<Pose2D> pose;
            if (last_pose.contains(partner)) {
              pose = last_pose[partner];
            } else if (ev.contains("partner_pose")) {
              pose = ev["partner_pose"].get<Pose2D>();
            }
            if (!pose || !ev.contains("placement")) {
              flag(i, "placement geometry", id + " placement cannot be checked");
            } else {
              const Point placed = ev["placement"].get<Point>();
              const Point want = pose->position() + Point{std::cos(pose->heading), std::sin(pose->heading)} * offset;
              const double err = distance(placed, want);
              if (err > kPlacementTolerance) {
                flag(i, "placement geometry", id + " box placed " + std::to_string(err) + " m from the in-front point");
              }
            }
          }
          if (event == "corroborated") {
            const Json ev = p.value("evidence", Json::object());
            auto r = requests.find(ev.value("request_id", ""));
            bool ok = r != requests.end();
            if (ok) {
              const auto& rq = r->second;
              ok = rq.quorum == "any" ? !rq.confirmed.empty()
                                      : std::includes(rq.confirmed.begin(), rq.confirmed.end(),
                                                      rq.corroborators.begin(), rq.corroborators.end());
            }
            if (!ok) flag(i, "corroboration", id + " corroborated without a confirming quorum");
          }
          m.state = state;
          m.terminal = def.is_terminal(state);
          break;
        }
        default:
          break;
      }
    } catch (const std::exception& e) {
      flag(i, "format", std::string("malformed payload: ") + e.what());
    }
  }
  if (!lines.empty() && !saw_bye) flag(lines.size(), "truncated", "log does not end with the hub's BYE");
  return out;
}

VerifyResult verify_log(const std::string& path) {
  const auto lines = read_lines(path);
  std::optional<std::string> digest;
  std::ifstream side(digest_path(path));
  if (side) {
    std::string d;
    side >> d;
    if (!d.empty()) digest = d;
  }
  return verify_lines(lines, digest);
}

}  // namespace fleet
