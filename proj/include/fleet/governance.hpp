#pragma once
// C3 governance engine: mission state machines, corroboration lifecycle,
// collaboration proposals on battery faults.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fleet/error.hpp"
#include "fleet/model.hpp"

namespace fleet::gov {

namespace state {
inline constexpr const char* triggered = "Triggered";
inline constexpr const char* completed = "Completed";
inline constexpr const char* unverified = "Unverified";
inline constexpr const char* aborted = "Aborted";
}  // namespace state

namespace event {
inline constexpr const char* fault = "fault";
inline constexpr const char* participant_lost = "participant_lost";
inline constexpr const char* protocol_violation = "protocol_violation";
}  // namespace event

struct TimeoutRule {
  Tick ticks = 0;
  std::string event;
  friend bool operator==(const TimeoutRule&, const TimeoutRule&) = default;
};

/// Counts `event` while in a state; the `limit`-th occurrence is replaced by
/// `exhausted_event`.
struct RetryRule {
  std::string event;
  int limit = 0;
  std::string exhausted_event;
  friend bool operator==(const RetryRule&, const RetryRule&) = default;
};

struct MissionDefinition {
  MissionType mission_type = MissionType::M1;
  std::string initial_state = state::triggered;
  std::set<std::string> terminal_states{state::completed, state::unverified, state::aborted};
  std::map<std::pair<std::string, std::string>, std::string> transitions;
  std::map<std::string, TimeoutRule> timeouts;
  std::map<std::string, RetryRule> retries;
  std::vector<std::string> roles;

  std::optional<std::string> next(const std::string& from, const std::string& event) const;
  bool is_terminal(const std::string& s) const { return terminal_states.contains(s); }
  bool has_edge(const std::string& from, const std::string& to) const;
  std::set<std::string> states() const;
  std::set<std::string> events() const;
  /// Structural problems: unknown initial state, terminal states with
  /// successors, states that cannot reach a terminal state.
  std::vector<std::string> validate() const;

  friend bool operator==(const MissionDefinition&, const MissionDefinition&) = default;
};

struct GovernanceConfig {
  double detection_threshold = kDefaultDetectionThreshold;
  int grasp_retries = 3;
  Tick search_timeout = 1200;
  Tick corroboration_deadline = 300;
  bool auto_approve = false;
  std::set<MissionType> disabled;
  double trace_radius = 1.0;
  double trace_side = 1.0;
  int trace_samples = 36;
  double placement_offset = 2.0;
};

MissionDefinition default_definition(MissionType type, const GovernanceConfig& cfg = {});
std::map<MissionType, MissionDefinition> default_definitions(const GovernanceConfig& cfg = {});

/// True when consecutive history states are joined by some edge of `def`,
/// the history starts at the initial state and nothing follows a terminal.
bool history_is_path(const MissionDefinition& def, const MissionInstance& instance);

using Registry = std::map<std::string, PlatformDescriptor>;

struct Proposal {
  std::string proposal_id;
  std::string beneficiary;
  std::optional<std::string> helper;
  bool feasible = false;
  std::string reason;
  std::string status;  // pending | approved | triggered | infeasible | dismissed
  Tick raised_tick = 0;
  Json alert = Json::object();
  std::optional<std::string> mission_id;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct OpenRequest {
  CorroborationRequest request;
  std::string purpose;  // "final" or "checkpoint"
  std::map<std::string, Verdict> verdicts;
  std::string resolution;  // "", confirmed, denied, expired
};

// Effects drained by the hub and turned into frames.
struct StatusChanged {
  MissionInstance mission;
  std::string previous_state;
  std::string event;
  std::string cause;
  Json evidence = Json::object();
};
struct CommandOut {
  std::string dst;
  Json payload;  // {"verb": ..., "mission_id": ..., args}
};
struct RequestOut {
  CorroborationRequest request;
};
struct C3Out {
  C3Event event;
};
struct ProposalOut {
  Proposal proposal;
};
using Effect = std::variant<StatusChanged, CommandOut, RequestOut, C3Out, ProposalOut>;

struct AdvanceResult {
  bool accepted = false;
  std::string from;
  std::string to;
  std::optional<std::string> violation;  // set for protocol violations
  std::optional<std::string> rejection;  // set for guard failures (no state change)
};

struct VerdictResult {
  bool accepted = false;
  std::string reason;
};

class Governance {
 public:
  explicit Governance(GovernanceConfig cfg = {});
  Governance(GovernanceConfig cfg, std::map<MissionType, MissionDefinition> definitions);

  const GovernanceConfig& config() const { return cfg_; }
  const std::map<MissionType, MissionDefinition>& definitions() const { return defs_; }

  /// Throws TriggerRejected with the reason.
  MissionInstance trigger_mission(MissionType type, const Json& params, const std::string& initiated_by,
                                  const Registry& registry, Tick now, bool hitl_approval = false);

  /// `evidence` carries the payload of the reporting frame (detections,
  /// placements, trace metrics).
  AdvanceResult advance(const std::string& mission_id, const std::string& event, Tick now,
                        const Json& evidence = Json::object());

  /// Throws CorroborationRejected for an empty or unregistered corroborator set.
  CorroborationRequest request_corroboration(const std::string& mission_id, const Json& subject,
                                             const std::vector<std::string>& corroborators,
                                             Tick deadline_ticks, Tick now, const Registry& registry,
                                             const std::string& quorum = "all",
                                             const std::string& purpose = "final");

  VerdictResult submit_verdict(const CorroborationVerdict& verdict, const Registry& registry, Tick now);

  /// Returns the new proposal, or nothing when deduplicated.
  std::optional<Proposal> handle_alert(const std::string& agent_id, const Json& alert,
                                       const Registry& registry, Tick now);
  /// False when the proposal is stale (already handled).
  bool approve_proposal(const std::string& proposal_id, const std::string& approver,
                        const Registry& registry, Tick now);
  bool dismiss_proposal(const std::string& proposal_id);

  /// Expires requests, fires state timeouts, retries approved proposals.
  void on_tick(Tick now, const Registry& registry);
  void participant_lost(const std::string& agent_id, Tick now);
  /// An aerial agent was steered to follow `target`; logs cooperation when the
  /// target is executing a mission.
  void on_follow(const std::string& follower, const std::string& target, const Registry& registry, Tick now);

  std::vector<Effect> take_effects();

  const std::map<std::string, MissionInstance>& missions() const { return missions_; }
  const MissionInstance* find_mission(const std::string& id) const;
  const std::map<std::string, OpenRequest>& requests() const { return requests_; }
  const std::map<std::string, Proposal>& proposals() const { return proposals_; }
  std::optional<std::string> active_mission_for(const std::string& agent_id) const;
  /// Mission (non-terminal) where `agent_id` is the beneficiary.
  std::optional<std::string> mission_for_beneficiary(const std::string& agent_id) const;
  std::uint64_t c3_count() const { return next_event_id_ - 1; }

 private:
  struct Runtime {
    Tick entered = 0;
    std::map<std::string, int> retry_counts;
    Json context = Json::object();
    std::vector<std::string> checkpoint_requests;
    std::optional<std::string> final_request;
  };

  bool is_terminal(const MissionInstance& m) const;
  void transition(MissionInstance& m, const std::string& to, Tick now, const std::string& event,
                  const std::string& cause, const Json& evidence);
  void on_enter(MissionInstance& m, const std::string& event, Tick now, const Json& evidence);
  void command(const MissionInstance& m, Json payload);
  void emit_c3(C3Kind kind, InteractionPattern pattern, const std::string& initiator,
               const std::string& responder, const std::optional<std::string>& mission, Tick now,
               Json detail);
  void resolve_request(OpenRequest& r, const std::string& resolution, Tick now);
  void try_trigger(Proposal& p, const Registry& registry, Tick now, const std::string& approver);

  GovernanceConfig cfg_;
  std::map<MissionType, MissionDefinition> defs_;
  std::map<std::string, MissionInstance> missions_;
  std::map<std::string, Runtime> runtime_;
  std::map<std::string, OpenRequest> requests_;
  std::map<std::string, Proposal> proposals_;
  std::map<std::string, PlatformKind> kinds_;  // last known kinds for C3 classification
  std::vector<Effect> effects_;
  std::uint64_t next_mission_ = 1;
  std::uint64_t next_request_ = 1;
  std::uint64_t next_proposal_ = 1;
  std::uint64_t next_event_id_ = 1;
};

void to_json(Json& j, const MissionDefinition& v);
void from_json(const Json& j, MissionDefinition& v);
void to_json(Json& j, const Proposal& v);
void to_json(Json& j, const GovernanceConfig& v);

}  // namespace fleet::gov
