#pragma once
// Resilience metrics computed purely from an event log.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fleet/model.hpp"

namespace fleet {

struct ResilienceReport {
  std::map<std::string, std::uint64_t> terminal_counts;  // Completed / Unverified / Aborted
  std::map<std::string, std::uint64_t> c3_counts;        // cooperation / collaboration / corroboration
  Tick total_ticks = 0;
  /// Ticks each agent spent immobilized; an interval still open at the end
  /// of the log runs to its last tick.
  std::map<std::string, Tick> downtime;
  /// Alert tick to battery-placed tick, per alerting agent; null when no
  /// assist followed the first alert.
  std::map<std::string, std::optional<Tick>> time_to_assist;

  friend bool operator==(const ResilienceReport&, const ResilienceReport&) = default;
};

/// Throws LogError naming the offset of the first malformed record.
ResilienceReport resilience_report(const std::vector<std::string>& lines);

void to_json(Json& j, const ResilienceReport& r);

}  // namespace fleet
