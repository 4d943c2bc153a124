#pragma once

#include "canoe/clock.hpp"
#include "canoe/contestation.hpp"
#include "canoe/pipeline.hpp"
#include "canoe/plangen.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace canoe {

// One directory per session:
//   case.json, evidence.json, team.json (with the session id), config.json,
//   schedule.json, graph.initial.json
//                        -- written once when the session is created
//   audit.jsonl          -- append-only, one canonical entry per line, fsynced
//   graph.json, degrees.json, session.json
//                        -- derived from the above; rewritten after every change
//   plan.json            -- once planned
// The audit log is authoritative. Every mutation appends its entry first and
// then rewrites the derived files, so a crash in between is repaired by the
// replay done on the next load.
class SessionDir {
 public:
  explicit SessionDir(std::filesystem::path dir) : dir_(std::move(dir)) {}

  // Writes a fresh session directory from a pipeline run and opens the session.
  static SessionDir create(std::filesystem::path dir, const std::string& session_id, const PatientCase& patient,
                           const PipelineResult& run, const PipelineConfig& config, const ScheduleSettings& schedule);

  const std::filesystem::path& path() const { return dir_; }
  bool exists() const;

  SessionSeed load_seed() const;
  std::vector<AuditEntry> load_audit() const;  // BrokenChain on malformed lines
  ScheduleSettings load_schedule() const;

  // Replays the audit over the seed and repairs the derived files if they
  // disagree with the result.
  ContestationSession load() const;

  void append(const AuditEntry& entry) const;
  void write_state(const ContestationSession& s) const;

 private:
  std::filesystem::path file(const char* name) const { return dir_ / name; }
  std::filesystem::path dir_;
};

// Derived file contents, exposed so tests and the service serve the same bytes.
std::string degrees_file(const ContestationSession& s);  // {"format_version":1,"stale":true} when stale
std::string session_file(const ContestationSession& s);
nlohmann::json session_summary(const ContestationSession& s);

// Mutations shared by the CLI and the HTTP service.
ContestationSession session_edit(const SessionDir& dir, const EditAction& action, const Clock& clock);
ContestationSession session_revalidate(const SessionDir& dir, Role actor, const Clock& clock);
ContestationSession session_approve(const SessionDir& dir, Role actor, bool force, const Clock& clock);
// Synthesizes and schedules the plan, writes plan.json, then records it.
CarePlan session_plan(const SessionDir& dir, Role actor, const Clock& clock);

// Phases 1-2 for one case, written to `dir` as session `session_id`.
struct RunOutcome {
  SessionDir dir;
  PipelineResult result;
};
RunOutcome run_session(const std::filesystem::path& dir, const std::string& session_id, const PatientCase& patient,
                       const std::vector<EvidenceDoc>& corpus, const RuleBook& rules, const PipelineConfig& config,
                       ArgumentBackend& backend, const ScheduleSettings& schedule);

// Strict check used by `replay`: parses and replays the audit, then compares
// every derived file (and plan.json against its recorded digest) with the
// replayed state, byte for byte. Never writes. BrokenChain on any mismatch.
ContestationSession verify_session(const SessionDir& dir);

// Default config for a rule book: library defaults plus its tier thresholds.
PipelineConfig default_pipeline_config(const RuleBook& rules);

// Bundled defaults used by `run` when nothing else is given.
ScheduleSettings default_schedule_settings(const RuleBook& rules);
CalendarConfig load_calendar(const std::filesystem::path& file);
std::filesystem::path default_calendar_file();

// --- exports ------------------------------------------------------------------

// Support edges solid, attack edges dashed; labels "id\ntau=..., f=...".
std::string to_dot(const ArgumentGraph& g, const DegreeAssignment* degrees);
std::string audit_csv(const std::vector<AuditEntry>& audit);
std::string participation_csv(const ArgumentGraph& g);
nlohmann::json participation_json(const ArgumentGraph& g);

}  // namespace canoe
