#pragma once

#include "canoe/graph.hpp"
#include "canoe/pipeline.hpp"
#include "canoe/rules.hpp"
#include "canoe/semantics.hpp"
#include "canoe/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace canoe {

enum class Phase { debated, contesting, approved, planned };
std::string_view to_string(Phase p);
Phase parse_phase(std::string_view s);

// Kinds a reviewer may submit, followed by the lifecycle events the session
// itself records in the audit log.
enum class ActionKind { accept, reject, modify, add, pin_tau, add_relation, revalidate, approve, plan };
std::string_view to_string(ActionKind k);
ActionKind parse_action_kind(std::string_view s);
bool is_edit(ActionKind k);

// Payload by kind (target is required for every edit except add):
//   accept, reject               {}
//   modify                       {"content": text}
//   add                          {"content", "stance", "role", "target_option", "cited_evidence"?, "arg_id"?}
//   pin_tau                      {"tau": real in [0,1]}
//   add_relation                 {"source", "polarity", "weight"?}; target is the relation target
//   revalidate                   {"iterations_used", "residual"} (recorded)
//   approve                      {"force": bool, "bulk_accepted": [...] (recorded)}
//   plan                         {"plan_id", "plan_hash"}
// The audit log stores the action as applied, e.g. with the assigned arg_id of
// an addition and the bulk-accepted ids of a forced approval.
struct EditAction {
  Role actor = Role::human_reviewer;
  ActionKind kind = ActionKind::accept;
  std::optional<std::string> target;
  nlohmann::json payload = nlohmann::json::object();
  friend bool operator==(const EditAction&, const EditAction&) = default;
};

nlohmann::json to_json(const EditAction& a);
EditAction edit_action_from_json(const nlohmann::json& j);  // InvalidPayload

inline constexpr std::string_view kGenesisHash =
    "0000000000000000000000000000000000000000000000000000000000000000";

// pre_hash/post_hash are content hashes of the canonical graph and chain
// contiguously (post_hash of n == pre_hash of n+1). entry_hash chains whole
// records, timestamp included: sha256(previous entry_hash + "\n" + the
// canonical entry without entry_hash).
struct AuditEntry {
  int seq = 0;
  std::string timestamp;
  EditAction action;
  std::string pre_hash;
  std::string post_hash;
  std::optional<nlohmann::json> tombstone;  // removed argument and relations, for reject
  std::string entry_hash;
  friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

nlohmann::json to_json(const AuditEntry& e);
AuditEntry audit_entry_from_json(const nlohmann::json& j);
std::string audit_line(const AuditEntry& e);  // canonical single line, no newline
std::string compute_entry_hash(const AuditEntry& e, const std::string& previous);

// Parses an append-only audit log (one canonical entry per line). A line that
// does not parse or is not in canonical form raises BrokenChain at that seq.
std::vector<AuditEntry> parse_audit_log(const std::string& text);

// Checks seq numbering, the entry-hash chain and pre/post contiguity.
// BrokenChain with detail {"seq": n} at the first bad entry.
void verify_chain(std::span<const AuditEntry> audit, const std::string& initial_graph_hash);

// Everything needed to rebuild a session from scratch.
struct SessionSeed {
  std::string session_id;
  PatientCase patient;
  std::vector<EvidenceDoc> evidence;
  ArgumentGraph initial_graph;
  PipelineConfig config;
};

// Phase-3 contestation state. Single writer: mutators are not synchronized.
// Every mutator either succeeds completely or leaves the session untouched.
class ContestationSession {
 public:
  // Moves a solved, debated graph into phase `contesting` with every argument
  // pending. UnsolvedGraph when `degrees` is absent or misses an argument or
  // option.
  static ContestationSession open(SessionSeed seed, std::optional<DegreeAssignment> degrees);

  const std::string& id() const { return seed_.session_id; }
  const SessionSeed& seed() const { return seed_; }
  const PatientCase& patient() const { return seed_.patient; }
  const PipelineConfig& config() const { return seed_.config; }
  Phase phase() const { return phase_; }
  const ArgumentGraph& graph() const { return graph_; }
  const std::string& current_graph_hash() const { return graph_hash_; }
  const std::vector<AuditEntry>& audit() const { return audit_; }
  std::string head_hash() const;

  bool degrees_stale() const { return stale_; }
  // Errc::validation when stale; revalidate first.
  const DegreeAssignment& degrees() const;
  std::vector<std::string> pending_arguments() const;

  // WrongPhase, UnknownTarget, InvalidPayload. Leaves degrees stale.
  const AuditEntry& apply_edit(const EditAction& action, const std::string& timestamp);
  // Re-solves the current graph. NonConvergence leaves the session unchanged.
  const AuditEntry& revalidate(Role actor, const std::string& timestamp);
  // WrongPhase, PendingArguments, InvalidPayload (actor is not the care planner).
  const AuditEntry& approve(Role actor, bool force, const std::string& timestamp);
  // approved -> planned, recording the plan file digest.
  const AuditEntry& mark_planned(Role actor, const std::string& plan_id, const std::string& plan_hash,
                                 const std::string& timestamp);

  // Re-applies one recorded entry; BrokenChain when the regenerated entry
  // differs from the recorded one.
  void replay_entry(const AuditEntry& recorded);

 private:
  ContestationSession() = default;
  const AuditEntry& record(EditAction applied, const std::string& timestamp, const std::string& pre_hash,
                           std::optional<nlohmann::json> tombstone);
  void require_phase(Phase expected, std::string_view op) const;
  DegreeAssignment solve_current() const;

  SessionSeed seed_;
  Phase phase_ = Phase::debated;
  ArgumentGraph graph_;
  std::string graph_hash_;  // of graph_; refreshed by record(), which follows every mutation
  DegreeAssignment degrees_;
  bool stale_ = false;
  std::vector<AuditEntry> audit_;
};

// Rounds every value to the persisted precision.
DegreeAssignment canonical_degrees(DegreeAssignment d);

// Rebuilds the session from its seed: solve the initial graph, open, then
// re-apply every audit entry, checking the chain as it goes. BrokenChain
// reports the first offending seq.
ContestationSession replay(const SessionSeed& seed, std::span<const AuditEntry> audit);

}  // namespace canoe
