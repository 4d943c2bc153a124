#pragma once

#include "canoe/contestation.hpp"
#include "canoe/rules.hpp"
#include "canoe/types.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace canoe {

enum class Tier { recommended_high, recommended, conditional, not_recommended };
std::string_view to_string(Tier t);
Tier parse_tier(std::string_view s);
inline int tier_rank(Tier t) { return static_cast<int>(t); }

// Thresholds are inclusive lower bounds. OutOfRange outside [0,1].
Tier tier_option(double score, const TierThresholds& t = {});

inline constexpr std::string_view kNoChallengesNote = "no challenges recorded";

struct PlanEntry {
  CareOption option;
  double score = 0.5;
  Tier tier = Tier::conditional;
  std::vector<std::string> supporting_citations;   // arg_ids, degree desc then id
  std::vector<std::string> challenging_citations;  // same order
  std::vector<std::string> evidence_citations;     // doc_ids cited by either list, ascending
  std::vector<std::string> mitigation_notes;       // conditional tier only
  std::optional<Role> owner;                       // role of the top supporter
  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

enum class TaskStatus { proposed, booked, conflict };
std::string_view to_string(TaskStatus s);
TaskStatus parse_task_status(std::string_view s);

struct ScheduledTask {
  std::string task_id;
  std::string option_id;
  Role provider_role = Role::care_coordinator;
  std::string earliest_date;  // YYYY-MM-DD
  int duration_minutes = 60;
  TaskStatus status = TaskStatus::proposed;
  std::string start;  // "YYYY-MM-DDTHH:MM" once booked
  friend bool operator==(const ScheduledTask&, const ScheduledTask&) = default;
};

struct CarePlan {
  std::string plan_id;
  std::string case_id;
  std::string source_session;
  std::string generated_at;
  std::vector<PlanEntry> entries;  // (tier rank, score desc, option_id asc)
  std::vector<ScheduledTask> tasks;
  friend bool operator==(const CarePlan&, const CarePlan&) = default;
};

// Pure function of an approved session. WrongPhase otherwise.
CarePlan synthesize_plan(const ContestationSession& session, const std::string& generated_at);

// --- booking tool -------------------------------------------------------------

// Request:  {"method": "book_appointment",
//            "arguments": {"role": r, "date": "YYYY-MM-DD", "duration": minutes}}
// Response: {"status": "booked" | "conflict", "task_id": id, "start": "YYYY-MM-DDTHH:MM" | null}
class SchedulingTool {
 public:
  virtual ~SchedulingTool() = default;
  virtual nlohmann::json call(const nlohmann::json& request) = 0;
};

struct BusyBlock {
  Role role = Role::care_coordinator;
  std::string date;
  int start_minute = 0;  // minutes after midnight
  int end_minute = 0;
  friend bool operator==(const BusyBlock&, const BusyBlock&) = default;
};

struct CalendarConfig {
  std::string start_date = "2026-01-05";
  int horizon_days = 1;  // days searched from the requested date, inclusive
  int day_start_minute = 9 * 60;
  int day_end_minute = 17 * 60;
  std::vector<BusyBlock> busy;
  friend bool operator==(const CalendarConfig&, const CalendarConfig&) = default;
};

nlohmann::json to_json(const CalendarConfig& c);
CalendarConfig calendar_from_json(const nlohmann::json& j);

// Per-role calendar with greedy earliest-fit placement. Not thread-safe.
class InMemoryCalendar final : public SchedulingTool {
 public:
  explicit InMemoryCalendar(CalendarConfig cfg);
  nlohmann::json call(const nlohmann::json& request) override;
  const std::vector<BusyBlock>& bookings() const { return booked_; }

 private:
  CalendarConfig cfg_;
  std::vector<BusyBlock> booked_;
  int next_task_ = 1;
};

// One task per recommended_high / recommended entry, in plan order, owned by
// the top supporter's role (care_coordinator without supporters). Durations
// not listed default to 60 minutes.
std::vector<ScheduledTask> propose_tasks(const CarePlan& plan, const std::string& earliest_date,
                                         const std::map<std::string, int>& durations);
std::vector<ScheduledTask> schedule_tasks(const CarePlan& plan, SchedulingTool& tool, const std::string& earliest_date,
                                          const std::map<std::string, int>& durations);

// Snapshot stored with a session so that planning depends on session files only.
struct ScheduleSettings {
  CalendarConfig calendar;
  std::map<std::string, int> durations;
  friend bool operator==(const ScheduleSettings&, const ScheduleSettings&) = default;
};

nlohmann::json to_json(const ScheduleSettings& s);
ScheduleSettings schedule_settings_from_json(const nlohmann::json& j);

nlohmann::json to_json(const PlanEntry& e);
nlohmann::json to_json(const ScheduledTask& t);
nlohmann::json to_json(const CarePlan& p);
CarePlan plan_from_json(const nlohmann::json& j);
std::string serialize_plan(const CarePlan& p);  // canonical, indented

}  // namespace canoe
