#include "canoe/store.hpp"

#include "canoe/canonical.hpp"
#include "canoe/error.hpp"
#include "canoe/serialize.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace canoe {

namespace {

std::string pretty(const nlohmann::json& j) { return dump_canonical(j, 2) + "\n"; }

void write_if_changed(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (std::filesystem::exists(path, ec)) {
    try {
      if (read_text_file(path) == text) return;
    } catch (const Error&) {
      // unreadable: fall through and rewrite
    }
  }
  write_text_file_atomic(path, text);
}

nlohmann::json evidence_file(const std::vector<EvidenceDoc>& docs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& d : docs) arr.push_back(to_json(d));
  return {{"format_version", kFormatVersion}, {"documents", arr}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

SessionDir SessionDir::create(std::filesystem::path dir, const std::string& session_id, const PatientCase& patient,
                              const PipelineResult& run, const PipelineConfig& config,
                              const ScheduleSettings& schedule) {
  SessionSeed seed{session_id, patient, run.evidence, run.graph, config};
  auto session = ContestationSession::open(seed, run.degrees);

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(Errc::io, "cannot create " + dir.string() + ": " + ec.message());
  if (std::filesystem::exists(dir / "audit.jsonl")) {
    throw Error(Errc::duplicate_id, "a session already exists in " + dir.string());
  }
  SessionDir out(std::move(dir));
  write_text_file_atomic(out.file("case.json"), pretty(to_json(patient)));
  write_text_file_atomic(out.file("evidence.json"), pretty(evidence_file(run.evidence)));
  auto team = team_to_json(run.complexity, run.roster, run.warnings);
  team["session_id"] = session_id;
  write_text_file_atomic(out.file("team.json"), pretty(team));
  write_text_file_atomic(out.file("config.json"), pretty(to_json(config)));
  write_text_file_atomic(out.file("schedule.json"), pretty(to_json(schedule)));
  write_text_file_atomic(out.file("graph.initial.json"), serialize_graph(run.graph));
  out.write_state(session);
  // The empty log goes last: its presence marks a complete session.
  write_text_file_atomic(out.file("audit.jsonl"), "");
  return out;
}

bool SessionDir::exists() const { return std::filesystem::exists(dir_ / "audit.jsonl"); }

SessionSeed SessionDir::load_seed() const {
  if (!exists()) throw Error(Errc::not_found, "no session in " + dir_.string());
  SessionSeed seed;
  // Only write-once files here: every derived file must be rebuildable.
  seed.session_id = field::string(read_json_file(file("team.json")), "session_id");
  seed.patient = case_from_json(read_json_file(file("case.json")));
  const auto ev = read_json_file(file("evidence.json"));
  field::check_version(ev);
  for (const auto& d : field::required(ev, "documents")) seed.evidence.push_back(evidence_from_json(d));
  seed.initial_graph = graph_from_json(read_json_file(file("graph.initial.json")));
  seed.config = pipeline_config_from_json(read_json_file(file("config.json")));
  return seed;
}

std::vector<AuditEntry> SessionDir::load_audit() const {
  if (!exists()) throw Error(Errc::not_found, "no session in " + dir_.string());
  return parse_audit_log(read_text_file(file("audit.jsonl")));
}

ScheduleSettings SessionDir::load_schedule() const {
  return schedule_settings_from_json(read_json_file(file("schedule.json")));
}

ContestationSession SessionDir::load() const {
  auto seed = load_seed();
  const auto audit = load_audit();
  auto session = replay(seed, audit);
  // Repair derived files a crash may have left behind the log.
  write_if_changed(file("graph.json"), serialize_graph(session.graph()));
  write_if_changed(file("degrees.json"), degrees_file(session));
  write_if_changed(file("session.json"), session_file(session));
  return session;
}

void SessionDir::append(const AuditEntry& entry) const {
  const std::string line = audit_line(entry) + "\n";
  const auto path = file("audit.jsonl");
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) throw Error(Errc::io, "cannot open " + path.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < line.size()) {
    const auto n = ::write(fd, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(fd);
      throw Error(Errc::io, "cannot append to " + path.string() + ": " + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
  const int rc = ::fsync(fd);
  ::close(fd);
  if (rc != 0) throw Error(Errc::io, "fsync failed on " + path.string());
}

void SessionDir::write_state(const ContestationSession& s) const {
  write_text_file_atomic(file("graph.json"), serialize_graph(s.graph()));
  write_text_file_atomic(file("degrees.json"), degrees_file(s));
  write_text_file_atomic(file("session.json"), session_file(s));
}

std::string degrees_file(const ContestationSession& s) {
  if (s.degrees_stale()) return pretty({{"format_version", kFormatVersion}, {"stale", true}});
  return pretty(to_json(s.degrees()));
}

nlohmann::json session_summary(const ContestationSession& s) {
  return {{"format_version", kFormatVersion},
          {"session_id", s.id()},
          {"case_id", s.patient().case_id},
          {"phase", std::string(to_string(s.phase()))},
          {"degrees_stale", s.degrees_stale()},
          {"pending", s.pending_arguments()},
          {"audit_length", s.audit().size()},
          {"head_hash", s.head_hash()},
          {"graph_hash", s.current_graph_hash()}};
}

std::string session_file(const ContestationSession& s) { return pretty(session_summary(s)); }

ContestationSession session_edit(const SessionDir& dir, const EditAction& action, const Clock& clock) {
  auto s = dir.load();
  dir.append(s.apply_edit(action, clock()));
  dir.write_state(s);
  return s;
}

ContestationSession session_revalidate(const SessionDir& dir, Role actor, const Clock& clock) {
  auto s = dir.load();
  dir.append(s.revalidate(actor, clock()));
  dir.write_state(s);
  return s;
}

ContestationSession session_approve(const SessionDir& dir, Role actor, bool force, const Clock& clock) {
  auto s = dir.load();
  dir.append(s.approve(actor, force, clock()));
  dir.write_state(s);
  return s;
}

CarePlan session_plan(const SessionDir& dir, Role actor, const Clock& clock) {
  auto s = dir.load();
  if (s.phase() != Phase::approved) {
    throw Error(Errc::wrong_phase, "planning requires an approved session, phase is " +
                                       std::string(to_string(s.phase())),
                {{"phase", std::string(to_string(s.phase()))}});
  }
  if (!is_human(actor)) throw Error(Errc::invalid_payload, "actor must be a human role");
  const auto schedule = dir.load_schedule();
  const std::string ts = clock();
  auto plan = synthesize_plan(s, ts);
  InMemoryCalendar calendar(schedule.calendar);
  plan.tasks = schedule_tasks(plan, calendar, schedule.calendar.start_date, schedule.durations);
  const auto text = serialize_plan(plan);
  write_text_file_atomic(dir.path() / "plan.json", text);
  dir.append(s.mark_planned(actor, plan.plan_id, sha256_hex(text), ts));
  dir.write_state(s);
  return plan;
}

RunOutcome run_session(const std::filesystem::path& dir, const std::string& session_id, const PatientCase& patient,
                       const std::vector<EvidenceDoc>& corpus, const RuleBook& rules, const PipelineConfig& config,
                       ArgumentBackend& backend, const ScheduleSettings& schedule) {
  auto result = run_pipeline(patient, corpus, rules, config, backend);
  auto out = SessionDir::create(dir, session_id, patient, result, config, schedule);
  return {std::move(out), std::move(result)};
}

ContestationSession verify_session(const SessionDir& dir) {
  auto seed = dir.load_seed();
  const auto audit = dir.load_audit();
  auto session = replay(seed, audit);
  const int last = static_cast<int>(audit.size());
  auto compare = [&](const char* name, const std::string& expected) {
    std::string actual;
    try {
      actual = read_text_file(dir.path() / name);
    } catch (const Error&) {
      throw Error(Errc::broken_chain, std::string(name) + " is missing", {{"seq", last}, {"file", name}});
    }
    if (actual != expected) {
      throw Error(Errc::broken_chain, std::string(name) + " does not match the replayed session",
                  {{"seq", last}, {"file", name}});
    }
  };
  compare("graph.json", serialize_graph(session.graph()));
  compare("degrees.json", degrees_file(session));
  compare("session.json", session_file(session));
  if (session.phase() == Phase::planned) {
    const auto& entry = session.audit().back();
    std::string text;
    try {
      text = read_text_file(dir.path() / "plan.json");
    } catch (const Error&) {
      throw Error(Errc::broken_chain, "plan.json is missing", {{"seq", entry.seq}, {"file", "plan.json"}});
    }
    if (sha256_hex(text) != entry.action.payload.at("plan_hash").get<std::string>()) {
      throw Error(Errc::broken_chain, "plan.json does not match the recorded digest",
                  {{"seq", entry.seq}, {"file", "plan.json"}});
    }
  }
  return session;
}

PipelineConfig default_pipeline_config(const RuleBook& rules) {
  PipelineConfig cfg;
  cfg.tiers = rules.tiers;
  return cfg;
}

std::filesystem::path default_calendar_file() { return default_sample_dir().parent_path() / "calendar" / "default.json"; }

CalendarConfig load_calendar(const std::filesystem::path& file) { return calendar_from_json(read_json_file(file)); }

ScheduleSettings default_schedule_settings(const RuleBook& rules) {
  ScheduleSettings s;
  s.calendar = load_calendar(default_calendar_file());
  for (const auto& t : rules.options) s.durations[t.option.option_id] = t.duration_minutes;
  return s;
}

// --- exports ------------------------------------------------------------------

std::string to_dot(const ArgumentGraph& g, const DegreeAssignment* degrees) {
  std::ostringstream out;
  out << "digraph canoe {\n  rankdir=LR;\n  node [fontname=\"Helvetica\"];\n";
  for (const auto& [id, opt] : g.options()) {
    std::string label = id;
    if (degrees != nullptr) label += "\\nF=" + fixed3(degrees->option_scores.at(id));
    out << "  \"" << dot_escape(id) << "\" [shape=ellipse, label=\"" << dot_escape(label) << "\"];\n";
  }
  for (const auto& [id, arg] : g.arguments()) {
    std::string f = "n/a";
    if (degrees != nullptr) f = fixed3(degrees->degrees.at(id));
    const std::string label = dot_escape(id) + "\\nτ=" + fixed3(arg.tau) + ", f=" + f;
    out << "  \"" << dot_escape(id) << "\" [shape=box, label=\"" << label << "\"];\n";
  }
  for (const auto& [id, arg] : g.arguments()) {
    out << "  \"" << dot_escape(id) << "\" -> \"" << dot_escape(arg.target_option) << "\" [style=dotted, color="
        << (arg.stance == Stance::support ? "darkgreen" : "firebrick") << ", arrowhead=none];\n";
  }
  for (const auto& [key, rel] : g.relations()) {
    const bool attack = rel.polarity == Polarity::attack;
    out << "  \"" << dot_escape(rel.source) << "\" -> \"" << dot_escape(rel.target) << "\" [style="
        << (attack ? "dashed, color=firebrick" : "solid, color=darkgreen") << ", label=\"" << fixed3(rel.weight)
        << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string audit_csv(const std::vector<AuditEntry>& audit) {
  std::string out = "seq,timestamp,actor,kind,target,payload,pre_hash,post_hash,entry_hash\n";
  for (const auto& e : audit) {
    out += std::to_string(e.seq) + "," + csv_field(e.timestamp) + "," +
           std::string(to_string(e.action.actor)) + "," + std::string(to_string(e.action.kind)) + "," +
           csv_field(e.action.target.value_or("")) + "," + csv_field(dump_canonical(e.action.payload)) + "," +
           e.pre_hash + "," + e.post_hash + "," + e.entry_hash + "\n";
  }
  return out;
}

std::string participation_csv(const ArgumentGraph& g) {
  std::string out = "role,support_count,challenge_count\n";
  for (const auto& [role, c] : participation_summary(g)) {
    out += std::string(to_string(role)) + "," + std::to_string(c.support_count) + "," +
           std::to_string(c.challenge_count) + "\n";
  }
  return out;
}

nlohmann::json participation_json(const ArgumentGraph& g) {
  nlohmann::json roles = nlohmann::json::object();
  for (const auto& [role, c] : participation_summary(g)) {
    roles[std::string(to_string(role))] = {{"support_count", c.support_count},
                                           {"challenge_count", c.challenge_count}};
  }
  return {{"format_version", kFormatVersion}, {"roles", roles}};
}

}  // namespace canoe
