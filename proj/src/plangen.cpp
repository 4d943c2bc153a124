#include "canoe/plangen.hpp"

#include "canoe/canonical.hpp"
#include "canoe/error.hpp"
#include "canoe/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

namespace canoe {

namespace {

constexpr std::array<std::string_view, 4> kTierNames = {"recommended_high", "recommended", "conditional",
                                                        "not_recommended"};
constexpr std::array<std::string_view, 3> kTaskNames = {"proposed", "booked", "conflict"};

std::chrono::sys_days parse_date(const std::string& s) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  char tail = 0;
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
    throw Error(Errc::validation, "expected a YYYY-MM-DD date, got '" + s + "'");
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) throw Error(Errc::validation, "invalid date '" + s + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days days) {
  const std::chrono::year_month_day ymd{days};
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

int parse_clock(const std::string& s) {
  unsigned h = 0;
  unsigned m = 0;
  char tail = 0;
  if (s.size() != 5 || std::sscanf(s.c_str(), "%2u:%2u%c", &h, &m, &tail) != 2 || h > 24 || m > 59 ||
      (h == 24 && m != 0)) {
    throw Error(Errc::validation, "expected an HH:MM time, got '" + s + "'");
  }
  return static_cast<int>(h * 60 + m);
}

std::string format_clock(int minute) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minute / 60, minute % 60);
  return buf;
}

// Live arguments of one stance on an option, strongest first.
std::vector<const Argument*> ranked(const ArgumentGraph& g, const DegreeAssignment& d, const std::string& option,
                                    Stance stance) {
  std::vector<const Argument*> out;
  for (const auto& [id, arg] : g.arguments()) {
    if (arg.target_option == option && arg.stance == stance) out.push_back(&arg);
  }
  std::stable_sort(out.begin(), out.end(), [&](const Argument* a, const Argument* b) {
    const double fa = d.degrees.at(a->arg_id);
    const double fb = d.degrees.at(b->arg_id);
    if (fa != fb) return fa > fb;
    return a->arg_id < b->arg_id;
  });
  return out;
}

}  // namespace

std::string_view to_string(Tier t) { return kTierNames[static_cast<std::size_t>(t)]; }

Tier parse_tier(std::string_view s) {
  for (std::size_t i = 0; i < kTierNames.size(); ++i) {
    if (kTierNames[i] == s) return static_cast<Tier>(i);
  }
  throw Error(Errc::validation, "unknown tier '" + std::string(s) + "'");
}

std::string_view to_string(TaskStatus s) { return kTaskNames[static_cast<std::size_t>(s)]; }

TaskStatus parse_task_status(std::string_view s) {
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == s) return static_cast<TaskStatus>(i);
  }
  throw Error(Errc::validation, "unknown task status '" + std::string(s) + "'");
}

Tier tier_option(double score, const TierThresholds& t) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(Errc::out_of_range, "score must lie in [0,1]", {{"score", std::isfinite(score) ? score : -1.0}});
  }
  if (score >= t.recommended_high) return Tier::recommended_high;
  if (score >= t.recommended) return Tier::recommended;
  if (score >= t.conditional) return Tier::conditional;
  return Tier::not_recommended;
}

CarePlan synthesize_plan(const ContestationSession& session, const std::string& generated_at) {
  if (session.phase() != Phase::approved) {
    throw Error(Errc::wrong_phase, "planning requires an approved session, phase is " +
                                       std::string(to_string(session.phase())),
                {{"phase", std::string(to_string(session.phase()))}});
  }
  const auto& g = session.graph();
  const auto& d = session.degrees();
  CarePlan plan;
  plan.plan_id = session.id() + "-plan";
  plan.case_id = session.patient().case_id;
  plan.source_session = session.id();
  plan.generated_at = generated_at;
  for (const auto& [oid, opt] : g.options()) {
    PlanEntry e;
    e.option = opt;
    e.score = d.option_scores.at(oid);
    e.tier = tier_option(e.score, session.config().tiers);
    std::set<std::string> docs;
    const auto pros = ranked(g, d, oid, Stance::support);
    const auto cons = ranked(g, d, oid, Stance::challenge);
    for (const auto* a : pros) {
      e.supporting_citations.push_back(a->arg_id);
      docs.insert(a->cited_evidence.begin(), a->cited_evidence.end());
    }
    for (const auto* a : cons) {
      e.challenging_citations.push_back(a->arg_id);
      docs.insert(a->cited_evidence.begin(), a->cited_evidence.end());
    }
    e.evidence_citations.assign(docs.begin(), docs.end());
    if (e.tier == Tier::conditional) {
      for (std::size_t i = 0; i < cons.size() && i < 2; ++i) e.mitigation_notes.push_back(cons[i]->content);
      if (e.mitigation_notes.empty()) e.mitigation_notes.emplace_back(kNoChallengesNote);
    }
    if (!pros.empty()) e.owner = pros.front()->role;
    plan.entries.push_back(std::move(e));
  }
  std::stable_sort(plan.entries.begin(), plan.entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
    if (a.tier != b.tier) return tier_rank(a.tier) < tier_rank(b.tier);
    if (a.score != b.score) return a.score > b.score;
    return a.option.option_id < b.option.option_id;
  });
  return plan;
}

// --- calendar -----------------------------------------------------------------

nlohmann::json to_json(const CalendarConfig& c) {
  nlohmann::json busy = nlohmann::json::array();
  for (const auto& b : c.busy) {
    busy.push_back({{"role", std::string(to_string(b.role))},
                    {"date", b.date},
                    {"start", format_clock(b.start_minute)},
                    {"end", format_clock(b.end_minute)}});
  }
  return {{"format_version", kFormatVersion},
          {"start_date", c.start_date},
          {"horizon_days", c.horizon_days},
          {"day_start", format_clock(c.day_start_minute)},
          {"day_end", format_clock(c.day_end_minute)},
          {"busy", busy}};
}

CalendarConfig calendar_from_json(const nlohmann::json& j) {
  field::check_version(j);
  CalendarConfig c;
  c.start_date = format_date(parse_date(field::string(j, "start_date")));
  c.horizon_days = field::integer(j, "horizon_days");
  if (c.horizon_days < 1) throw Error(Errc::validation, "horizon_days must be >= 1");
  c.day_start_minute = parse_clock(field::string(j, "day_start"));
  c.day_end_minute = parse_clock(field::string(j, "day_end"));
  if (c.day_start_minute >= c.day_end_minute) throw Error(Errc::validation, "day_start must precede day_end");
  for (const auto& b : field::required(j, "busy")) {
    BusyBlock block;
    block.role = parse_role(field::string(b, "role"));
    block.date = format_date(parse_date(field::string(b, "date")));
    block.start_minute = parse_clock(field::string(b, "start"));
    block.end_minute = parse_clock(field::string(b, "end"));
    if (block.start_minute >= block.end_minute) throw Error(Errc::validation, "busy block must have start < end");
    c.busy.push_back(block);
  }
  return c;
}

InMemoryCalendar::InMemoryCalendar(CalendarConfig cfg) : cfg_(std::move(cfg)) {}

nlohmann::json InMemoryCalendar::call(const nlohmann::json& request) {
  if (field::string(request, "method") != "book_appointment") {
    throw Error(Errc::validation, "unsupported tool method '" + field::string(request, "method") + "'");
  }
  const auto& args = field::required(request, "arguments");
  const Role role = parse_role(field::string(args, "role"));
  const auto first = parse_date(field::string(args, "date"));
  const int duration = field::integer(args, "duration");
  if (duration <= 0) throw Error(Errc::validation, "duration must be > 0");

  const std::string task_id = "task-" + std::to_string(next_task_++);
  for (int day = 0; day < cfg_.horizon_days; ++day) {
    const std::string date = format_date(first + std::chrono::days{day});
    std::vector<std::pair<int, int>> taken;
    for (const auto* list : {&cfg_.busy, &booked_}) {
      for (const auto& b : *list) {
        if (b.role == role && b.date == date) taken.emplace_back(b.start_minute, b.end_minute);
      }
    }
    std::sort(taken.begin(), taken.end());
    // Earliest fit: try the day start and the end of every taken block.
    std::vector<int> starts{cfg_.day_start_minute};
    for (const auto& [s, e] : taken) starts.push_back(e);
    std::sort(starts.begin(), starts.end());
    for (int start : starts) {
      if (start < cfg_.day_start_minute || start + duration > cfg_.day_end_minute) continue;
      const bool clash = std::any_of(taken.begin(), taken.end(),
                                     [&](const auto& t) { return start < t.second && t.first < start + duration; });
      if (clash) continue;
      booked_.push_back({role, date, start, start + duration});
      return {{"status", "booked"}, {"task_id", task_id}, {"start", date + "T" + format_clock(start)}};
    }
  }
  return {{"status", "conflict"}, {"task_id", task_id}, {"start", nullptr}};
}

std::vector<ScheduledTask> propose_tasks(const CarePlan& plan, const std::string& earliest_date,
                                         const std::map<std::string, int>& durations) {
  std::vector<ScheduledTask> out;
  for (const auto& e : plan.entries) {
    if (e.tier != Tier::recommended_high && e.tier != Tier::recommended) continue;
    ScheduledTask t;
    t.option_id = e.option.option_id;
    t.provider_role = e.owner.value_or(Role::care_coordinator);
    t.earliest_date = earliest_date;
    auto it = durations.find(t.option_id);
    t.duration_minutes = it == durations.end() ? 60 : it->second;
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<ScheduledTask> schedule_tasks(const CarePlan& plan, SchedulingTool& tool, const std::string& earliest_date,
                                          const std::map<std::string, int>& durations) {
  auto tasks = propose_tasks(plan, earliest_date, durations);
  for (auto& t : tasks) {
    const nlohmann::json request = {{"method", "book_appointment"},
                                    {"arguments",
                                     {{"role", std::string(to_string(t.provider_role))},
                                      {"date", t.earliest_date},
                                      {"duration", t.duration_minutes}}}};
    const auto response = tool.call(request);
    t.task_id = field::string(response, "task_id");
    const auto status = parse_task_status(field::string(response, "status"));
    if (status == TaskStatus::booked) {
      t.status = TaskStatus::booked;
      t.start = field::string(response, "start");
    } else {
      t.status = TaskStatus::conflict;
    }
  }
  return tasks;
}

nlohmann::json to_json(const ScheduleSettings& s) {
  nlohmann::json durations = nlohmann::json::object();
  for (const auto& [id, m] : s.durations) durations[id] = m;
  return {{"format_version", kFormatVersion}, {"calendar", to_json(s.calendar)}, {"durations", durations}};
}

ScheduleSettings schedule_settings_from_json(const nlohmann::json& j) {
  field::check_version(j);
  ScheduleSettings s;
  s.calendar = calendar_from_json(field::required(j, "calendar"));
  for (const auto& [id, m] : field::required(j, "durations").items()) {
    if (!m.is_number_integer() || m.get<int>() <= 0) {
      throw Error(Errc::validation, "duration of '" + id + "' must be a positive integer");
    }
    s.durations[id] = m.get<int>();
  }
  return s;
}

// --- plan file ----------------------------------------------------------------

nlohmann::json to_json(const PlanEntry& e) {
  return {{"option", to_json(e.option)},
          {"score", e.score},
          {"tier", std::string(to_string(e.tier))},
          {"supporting_citations", e.supporting_citations},
          {"challenging_citations", e.challenging_citations},
          {"evidence_citations", e.evidence_citations},
          {"mitigation_notes", e.mitigation_notes},
          {"owner", e.owner ? nlohmann::json(std::string(to_string(*e.owner))) : nlohmann::json(nullptr)}};
}

nlohmann::json to_json(const ScheduledTask& t) {
  return {{"task_id", t.task_id},
          {"option_id", t.option_id},
          {"provider_role", std::string(to_string(t.provider_role))},
          {"earliest_date", t.earliest_date},
          {"duration_minutes", t.duration_minutes},
          {"status", std::string(to_string(t.status))},
          {"start", t.start.empty() ? nlohmann::json(nullptr) : nlohmann::json(t.start)}};
}

nlohmann::json to_json(const CarePlan& p) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : p.entries) entries.push_back(to_json(e));
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : p.tasks) tasks.push_back(to_json(t));
  return {{"format_version", kFormatVersion},
          {"plan_id", p.plan_id},
          {"case_id", p.case_id},
          {"source_session", p.source_session},
          {"generated_at", p.generated_at},
          {"entries", entries},
          {"tasks", tasks}};
}

CarePlan plan_from_json(const nlohmann::json& j) {
  field::check_version(j);
  CarePlan p;
  p.plan_id = field::string(j, "plan_id");
  p.case_id = field::string(j, "case_id");
  p.source_session = field::string(j, "source_session");
  p.generated_at = field::string(j, "generated_at");
  for (const auto& je : field::required(j, "entries")) {
    PlanEntry e;
    e.option = option_from_json(field::required(je, "option"));
    e.score = field::real(je, "score");
    e.tier = parse_tier(field::string(je, "tier"));
    e.supporting_citations = field::strings(je, "supporting_citations");
    e.challenging_citations = field::strings(je, "challenging_citations");
    e.evidence_citations = field::strings(je, "evidence_citations");
    e.mitigation_notes = field::strings(je, "mitigation_notes");
    if (const auto& o = field::required(je, "owner"); !o.is_null()) e.owner = parse_role(o.get<std::string>());
    p.entries.push_back(std::move(e));
  }
  for (const auto& jt : field::required(j, "tasks")) {
    ScheduledTask t;
    t.task_id = field::string(jt, "task_id");
    t.option_id = field::string(jt, "option_id");
    t.provider_role = parse_role(field::string(jt, "provider_role"));
    t.earliest_date = field::string(jt, "earliest_date");
    t.duration_minutes = field::integer(jt, "duration_minutes");
    t.status = parse_task_status(field::string(jt, "status"));
    if (const auto& s = field::required(jt, "start"); !s.is_null()) t.start = s.get<std::string>();
    p.tasks.push_back(std::move(t));
  }
  return p;
}

std::string serialize_plan(const CarePlan& p) { return dump_canonical(to_json(p), 2) + "\n"; }

}  // namespace canoe
