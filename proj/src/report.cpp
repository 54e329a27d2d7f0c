#include "fleet/report.hpp"

#include "fleet/error.hpp"
#include "fleet/protocol.hpp"

namespace fleet {

ResilienceReport resilience_report(const std::vector<std::string>& lines) {
  ResilienceReport r;
  for (const char* s : {"Completed", "Unverified", "Aborted"}) r.terminal_counts[s] = 0;
  for (const char* k : {"cooperation", "collaboration", "corroboration"}) r.c3_counts[k] = 0;

  std::map<std::string, Tick> down_since;
  std::map<std::string, Tick> first_alert;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    proto::Frame f;
    try {
      f = proto::decode_frame(lines[i]);
    } catch (const std::exception& e) {
      throw LogError(i, e.what());
    }
    r.total_ticks = std::max(r.total_ticks, f.tick);
    const Json& p = f.payload;
    switch (f.type) {
      case proto::FrameType::TELEMETRY: {
        if (!p.contains("immobilized") || !p["immobilized"].is_boolean()) break;
        const bool down = p["immobilized"].get<bool>();
        r.downtime.try_emplace(f.src, 0);
        if (down && !down_since.contains(f.src)) {
          down_since[f.src] = f.tick;
        } else if (!down && down_since.contains(f.src)) {
          r.downtime[f.src] += f.tick - down_since[f.src];
          down_since.erase(f.src);
        }
        break;
      }
      case proto::FrameType::ALERT:
        if (p.value("kind", "") == "battery_low" && !first_alert.contains(f.src)) {
          first_alert[f.src] = f.tick;
          r.time_to_assist[f.src] = std::nullopt;
        }
        break;
      case proto::FrameType::MISSION_STATUS: {
        if (f.src != proto::kHub) break;
        const std::string state = p.value("state", "");
        if (r.terminal_counts.contains(state)) ++r.terminal_counts[state];
        if (p.value("event", "") == "placed" && p.contains("beneficiary") && p["beneficiary"].is_string()) {
          const auto who = p["beneficiary"].get<std::string>();
          auto a = first_alert.find(who);
          if (a != first_alert.end() && !r.time_to_assist[who]) r.time_to_assist[who] = f.tick - a->second;
        }
        break;
      }
      case proto::FrameType::EVENT:
        if (f.src == proto::kHub && p.contains("c3")) {
          try {
            ++r.c3_counts.at(p["c3"].at("kind").get<std::string>());
          } catch (const std::exception& e) {
            throw LogError(i, std::string("bad c3 event: ") + e.what());
          }
        }
        break;
      default:
        break;
    }
  }
  for (const auto& [id, since] : down_since) r.downtime[id] += r.total_ticks - since;
  return r;
}

void to_json(Json& j, const ResilienceReport& r) {
  Json tta = Json::object();
  for (const auto& [id, t] : r.time_to_assist) tta[id] = t ? Json(*t) : Json(nullptr);
  j = Json{{"terminal_counts", r.terminal_counts},
           {"c3_counts", r.c3_counts},
           {"total_ticks", r.total_ticks},
           {"downtime", r.downtime},
           {"time_to_assist", tta}};
}

}  // namespace fleet
