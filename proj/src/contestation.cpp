#include "canoe/contestation.hpp"

#include "canoe/canonical.hpp"
#include "canoe/error.hpp"
#include "canoe/serialize.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace canoe {

namespace {

constexpr std::array<std::string_view, 4> kPhaseNames = {"debated", "contesting", "approved", "planned"};
constexpr std::array<std::string_view, 9> kKindNames = {"accept",       "reject",     "modify",  "add", "pin_tau",
                                                        "add_relation", "revalidate", "approve", "plan"};

[[noreturn]] void bad_payload(const std::string& msg) { throw Error(Errc::invalid_payload, msg); }

// Rejects keys outside `allowed` so that a typo never silently becomes a no-op.
void only_keys(const nlohmann::json& payload, std::initializer_list<std::string_view> allowed, ActionKind kind) {
  if (!payload.is_object()) bad_payload("payload must be an object");
  for (const auto& [key, value] : payload.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad_payload("unexpected payload field '" + key + "' for " + std::string(to_string(kind)));
    }
  }
}

const nlohmann::json& need(const nlohmann::json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end()) bad_payload(std::string("payload is missing '") + key + "'");
  return *it;
}

std::string need_string(const nlohmann::json& payload, const char* key) {
  const auto& v = need(payload, key);
  if (!v.is_string()) bad_payload(std::string("payload field '") + key + "' must be a string");
  return v.get<std::string>();
}

double need_real(const nlohmann::json& payload, const char* key) {
  const auto& v = need(payload, key);
  if (!v.is_number()) bad_payload(std::string("payload field '") + key + "' must be a number");
  return v.get<double>();
}

template <typename F>
auto as_payload_error(F&& parse) {
  try {
    return parse();
  } catch (const Error& e) {
    if (e.code() == Errc::validation) bad_payload(e.what());
    throw;
  }
}

std::string previous_hash(const std::vector<AuditEntry>& audit) {
  return audit.empty() ? std::string(kGenesisHash) : audit.back().entry_hash;
}

nlohmann::json entry_body(const AuditEntry& e) {
  nlohmann::json j = {{"seq", e.seq},
                      {"timestamp", e.timestamp},
                      {"action", to_json(e.action)},
                      {"pre_hash", e.pre_hash},
                      {"post_hash", e.post_hash}};
  if (e.tombstone) j["tombstone"] = *e.tombstone;
  return j;
}

[[noreturn]] void broken(int seq, const std::string& why) {
  throw Error(Errc::broken_chain, "audit chain broken at seq " + std::to_string(seq) + ": " + why,
              {{"seq", seq}});
}

}  // namespace

std::string_view to_string(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }

Phase parse_phase(std::string_view s) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
    if (kPhaseNames[i] == s) return static_cast<Phase>(i);
  }
  throw Error(Errc::validation, "unknown phase '" + std::string(s) + "'");
}

std::string_view to_string(ActionKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

ActionKind parse_action_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<ActionKind>(i);
  }
  throw Error(Errc::invalid_payload, "unknown action kind '" + std::string(s) + "'");
}

bool is_edit(ActionKind k) {
  return k != ActionKind::revalidate && k != ActionKind::approve && k != ActionKind::plan;
}

nlohmann::json to_json(const EditAction& a) {
  nlohmann::json j = {{"actor", std::string(to_string(a.actor))},
                      {"kind", std::string(to_string(a.kind))},
                      {"payload", a.payload}};
  if (a.target) j["target"] = *a.target;
  return j;
}

EditAction edit_action_from_json(const nlohmann::json& j) {
  if (!j.is_object()) bad_payload("edit action must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "actor" && key != "kind" && key != "target" && key != "payload") {
      bad_payload("unexpected field '" + key + "' in edit action");
    }
  }
  EditAction a;
  a.actor = as_payload_error([&] { return parse_role(need_string(j, "actor")); });
  if (!is_human(a.actor)) bad_payload("actor must be human_reviewer or human_care_planner");
  a.kind = parse_action_kind(need_string(j, "kind"));
  if (auto it = j.find("target"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) bad_payload("target must be a string");
    a.target = it->get<std::string>();
  }
  if (auto it = j.find("payload"); it != j.end()) {
    if (!it->is_object()) bad_payload("payload must be an object");
    a.payload = *it;
  }
  return a;
}

nlohmann::json to_json(const AuditEntry& e) {
  auto j = entry_body(e);
  j["entry_hash"] = e.entry_hash;
  return j;
}

AuditEntry audit_entry_from_json(const nlohmann::json& j) {
  AuditEntry e;
  e.seq = field::integer(j, "seq");
  e.timestamp = field::string(j, "timestamp");
  e.action = edit_action_from_json(field::required(j, "action"));
  e.pre_hash = field::string(j, "pre_hash");
  e.post_hash = field::string(j, "post_hash");
  if (auto it = j.find("tombstone"); it != j.end()) e.tombstone = *it;
  e.entry_hash = field::string(j, "entry_hash");
  return e;
}

std::string audit_line(const AuditEntry& e) { return dump_canonical(to_json(e)); }

std::string compute_entry_hash(const AuditEntry& e, const std::string& previous) {
  return sha256_hex(previous + "\n" + dump_canonical(entry_body(e)));
}

std::vector<AuditEntry> parse_audit_log(const std::string& text) {
  std::vector<AuditEntry> out;
  std::istringstream in(text);
  std::string line;
  int seq = 0;
  while (std::getline(in, line)) {
    ++seq;
    AuditEntry e;
    try {
      e = audit_entry_from_json(nlohmann::json::parse(line));
    } catch (const std::exception& ex) {
      broken(seq, std::string("unreadable entry: ") + ex.what());
    }
    if (audit_line(e) != line) broken(seq, "entry is not in canonical form");
    out.push_back(std::move(e));
  }
  if (!text.empty() && text.back() != '\n') broken(seq, "truncated final entry");
  return out;
}

void verify_chain(std::span<const AuditEntry> audit, const std::string& initial_graph_hash) {
  std::string prev = std::string(kGenesisHash);
  std::string graph = initial_graph_hash;
  int seq = 0;
  for (const auto& e : audit) {
    ++seq;
    if (e.seq != seq) broken(seq, "expected seq " + std::to_string(seq) + ", found " + std::to_string(e.seq));
    if (e.pre_hash != graph) broken(seq, "pre_hash does not match the preceding graph");
    if (compute_entry_hash(e, prev) != e.entry_hash) broken(seq, "entry_hash mismatch");
    prev = e.entry_hash;
    graph = e.post_hash;
  }
}

DegreeAssignment canonical_degrees(DegreeAssignment d) {
  for (auto& [id, v] : d.degrees) v = canonical_real(v);
  for (auto& [id, v] : d.option_scores) v = canonical_real(v);
  d.residual = canonical_real(d.residual);
  return d;
}

ContestationSession ContestationSession::open(SessionSeed seed, std::optional<DegreeAssignment> degrees) {
  if (!degrees) throw Error(Errc::unsolved_graph, "graph has no degrees; solve it first");
  for (const auto& [id, arg] : seed.initial_graph.arguments()) {
    if (degrees->degrees.count(id) == 0) throw Error(Errc::unsolved_graph, "no degree for argument '" + id + "'");
  }
  for (const auto& [id, opt] : seed.initial_graph.options()) {
    if (degrees->option_scores.count(id) == 0) {
      throw Error(Errc::unsolved_graph, "no score for option '" + id + "'");
    }
  }
  ContestationSession s;
  s.graph_ = seed.initial_graph;
  for (const auto& [id, arg] : seed.initial_graph.arguments()) s.graph_.set_status(id, ArgStatus::pending);
  s.seed_ = std::move(seed);
  s.graph_hash_ = graph_hash(s.graph_);
  s.degrees_ = canonical_degrees(std::move(*degrees));
  s.phase_ = Phase::contesting;
  return s;
}

std::string ContestationSession::head_hash() const { return previous_hash(audit_); }

const DegreeAssignment& ContestationSession::degrees() const {
  if (stale_) throw Error(Errc::validation, "degrees are stale; revalidate first");
  return degrees_;
}

std::vector<std::string> ContestationSession::pending_arguments() const {
  std::vector<std::string> out;
  for (const auto& [id, arg] : graph_.arguments()) {
    if (arg.status == ArgStatus::pending) out.push_back(id);
  }
  return out;
}

void ContestationSession::require_phase(Phase expected, std::string_view op) const {
  if (phase_ != expected) {
    throw Error(Errc::wrong_phase,
                std::string(op) + " requires phase " + std::string(to_string(expected)) + ", session is " +
                    std::string(to_string(phase_)),
                {{"phase", std::string(to_string(phase_))}});
  }
}

DegreeAssignment ContestationSession::solve_current() const {
  return canonical_degrees(score_all_options(graph_, seed_.config.solver, seed_.config.aggregation));
}

const AuditEntry& ContestationSession::record(EditAction applied, const std::string& timestamp,
                                              const std::string& pre_hash, std::optional<nlohmann::json> tombstone) {
  AuditEntry e;
  e.seq = static_cast<int>(audit_.size()) + 1;
  e.timestamp = timestamp;
  e.action = std::move(applied);
  e.pre_hash = pre_hash;
  e.post_hash = graph_hash_ = graph_hash(graph_);
  e.tombstone = std::move(tombstone);
  e.entry_hash = compute_entry_hash(e, previous_hash(audit_));
  audit_.push_back(std::move(e));
  return audit_.back();
}

const AuditEntry& ContestationSession::apply_edit(const EditAction& action, const std::string& timestamp) {
  require_phase(Phase::contesting, "edit");
  if (!is_edit(action.kind)) bad_payload("'" + std::string(to_string(action.kind)) + "' is not an edit");
  if (!is_human(action.actor)) bad_payload("actor must be human_reviewer or human_care_planner");
  if (action.kind == ActionKind::add) {
    if (action.target) bad_payload("add takes no target");
  } else {
    if (!action.target) bad_payload(std::string(to_string(action.kind)) + " requires a target");
    if (!graph_.has_argument(*action.target)) {
      throw Error(Errc::unknown_target, "unknown target '" + *action.target + "'", {{"target", *action.target}});
    }
  }

  const std::string pre = graph_hash_;
  ArgumentGraph next = graph_;
  EditAction applied = action;
  std::optional<nlohmann::json> tombstone;
  const auto& p = action.payload;

  switch (action.kind) {
    case ActionKind::accept: {
      only_keys(p, {}, action.kind);
      next.set_status(*action.target, ArgStatus::accepted);
      break;
    }
    case ActionKind::reject: {
      only_keys(p, {}, action.kind);
      auto arg = next.argument(*action.target);
      auto removed = next.remove_argument(*action.target);
      nlohmann::json rels = nlohmann::json::array();
      for (const auto& r : removed) rels.push_back(to_json(r));
      tombstone = nlohmann::json{{"argument", to_json(arg)}, {"relations", rels}};
      break;
    }
    case ActionKind::modify: {
      only_keys(p, {"content"}, action.kind);
      auto content = need_string(p, "content");
      if (content.empty()) bad_payload("modified content must be nonempty");
      next.set_content(*action.target, content);
      const auto& arg = next.argument(*action.target);
      if (!arg.tau_pinned) {
        next.set_tau(arg.arg_id, score_intrinsic(arg, seed_.patient, seed_.evidence, seed_.config.scorer), false);
      }
      next.set_status(*action.target, ArgStatus::modified);
      break;
    }
    case ActionKind::add: {
      only_keys(p, {"content", "stance", "role", "target_option", "cited_evidence", "arg_id"}, action.kind);
      int adds = 0;
      for (const auto& e : audit_) adds += e.action.kind == ActionKind::add ? 1 : 0;
      Argument arg;
      arg.arg_id = human_arg_id(adds + 1);
      if (p.contains("arg_id") && need_string(p, "arg_id") != arg.arg_id) {
        bad_payload("arg_id of an addition is assigned by the session (next is '" + arg.arg_id + "')");
      }
      arg.content = need_string(p, "content");
      if (arg.content.empty()) bad_payload("content must be nonempty");
      arg.stance = as_payload_error([&] { return parse_stance(need_string(p, "stance")); });
      arg.role = as_payload_error([&] { return parse_role(need_string(p, "role")); });
      if (!is_provider(arg.role)) bad_payload("an added argument must be attributed to a provider role");
      arg.target_option = need_string(p, "target_option");
      if (!next.has_option(arg.target_option)) {
        throw Error(Errc::unknown_target, "unknown option '" + arg.target_option + "'",
                    {{"target_option", arg.target_option}});
      }
      if (p.contains("cited_evidence")) {
        arg.cited_evidence = as_payload_error([&] { return field::strings(p, "cited_evidence"); });
      }
      std::set<std::string> seen;
      for (const auto& doc : arg.cited_evidence) {
        const bool known = std::any_of(seed_.evidence.begin(), seed_.evidence.end(),
                                       [&](const EvidenceDoc& d) { return d.doc_id == doc; });
        if (!known) bad_payload("cited document '" + doc + "' is not in the session evidence");
        if (!seen.insert(doc).second) bad_payload("document '" + doc + "' cited twice");
      }
      arg.status = ArgStatus::added;
      arg.tau = score_intrinsic(arg, seed_.patient, seed_.evidence, seed_.config.scorer);
      applied.payload = {{"arg_id", arg.arg_id},
                         {"content", arg.content},
                         {"stance", std::string(to_string(arg.stance))},
                         {"role", std::string(to_string(arg.role))},
                         {"target_option", arg.target_option},
                         {"cited_evidence", arg.cited_evidence}};
      next.add_argument(std::move(arg));
      break;
    }
    case ActionKind::pin_tau: {
      only_keys(p, {"tau"}, action.kind);
      const double tau = need_real(p, "tau");
      if (!(tau >= 0.0 && tau <= 1.0)) bad_payload("tau must lie in [0,1]");
      next.set_tau(*action.target, tau, true);
      applied.payload = {{"tau", next.argument(*action.target).tau}};
      break;
    }
    case ActionKind::add_relation: {
      only_keys(p, {"source", "polarity", "weight"}, action.kind);
      Relation rel;
      rel.source = need_string(p, "source");
      rel.target = *action.target;
      rel.polarity = as_payload_error([&] { return parse_polarity(need_string(p, "polarity")); });
      rel.weight = p.contains("weight") ? need_real(p, "weight") : kDefaultEdgeWeight;
      if (!next.has_argument(rel.source)) {
        throw Error(Errc::unknown_target, "unknown relation source '" + rel.source + "'", {{"source", rel.source}});
      }
      if (rel.source == rel.target) bad_payload("a relation may not connect an argument to itself");
      if (!(rel.weight >= 0.0 && rel.weight <= 1.0)) bad_payload("relation weight must lie in [0,1]");
      next.add_relation(rel);
      const auto& stored = next.relations().at({rel.source, rel.target, rel.polarity});
      applied.payload = {{"source", stored.source},
                         {"polarity", std::string(to_string(stored.polarity))},
                         {"weight", stored.weight}};
      break;
    }
    default:
      bad_payload("unsupported edit kind");
  }

  graph_ = std::move(next);
  stale_ = true;
  return record(std::move(applied), timestamp, pre, std::move(tombstone));
}

const AuditEntry& ContestationSession::revalidate(Role actor, const std::string& timestamp) {
  require_phase(Phase::contesting, "revalidate");
  if (!is_human(actor)) bad_payload("actor must be human_reviewer or human_care_planner");
  auto fresh = solve_current();  // NonConvergence leaves everything as it was
  const std::string pre = graph_hash_;
  degrees_ = std::move(fresh);
  stale_ = false;
  EditAction a{actor, ActionKind::revalidate, std::nullopt,
               {{"iterations_used", degrees_.iterations_used}, {"residual", degrees_.residual}}};
  return record(std::move(a), timestamp, pre, std::nullopt);
}

const AuditEntry& ContestationSession::approve(Role actor, bool force, const std::string& timestamp) {
  require_phase(Phase::contesting, "approve");
  if (actor != Role::human_care_planner) {
    bad_payload("only the human_care_planner may approve, got " + std::string(to_string(actor)));
  }
  const auto pending = pending_arguments();
  if (!pending.empty() && !force) {
    throw Error(Errc::pending_arguments, std::to_string(pending.size()) + " argument(s) still pending",
                {{"pending", pending}});
  }
  std::optional<DegreeAssignment> fresh;
  if (stale_) fresh = solve_current();
  const std::string pre = graph_hash_;
  for (const auto& id : pending) graph_.set_status(id, ArgStatus::accepted);
  if (fresh) degrees_ = std::move(*fresh);
  stale_ = false;
  phase_ = Phase::approved;
  EditAction a{actor, ActionKind::approve, std::nullopt, {{"force", force}, {"bulk_accepted", pending}}};
  return record(std::move(a), timestamp, pre, std::nullopt);
}

const AuditEntry& ContestationSession::mark_planned(Role actor, const std::string& plan_id,
                                                    const std::string& plan_hash, const std::string& timestamp) {
  require_phase(Phase::approved, "plan");
  if (!is_human(actor)) bad_payload("actor must be human_reviewer or human_care_planner");
  phase_ = Phase::planned;
  EditAction a{actor, ActionKind::plan, std::nullopt, {{"plan_id", plan_id}, {"plan_hash", plan_hash}}};
  return record(std::move(a), timestamp, graph_hash_, std::nullopt);
}

void ContestationSession::replay_entry(const AuditEntry& recorded) {
  const int seq = static_cast<int>(audit_.size()) + 1;
  if (recorded.seq != seq) broken(seq, "expected seq " + std::to_string(seq));
  const auto& a = recorded.action;
  try {
    switch (a.kind) {
      case ActionKind::revalidate:
        revalidate(a.actor, recorded.timestamp);
        break;
      case ActionKind::approve: {
        const auto& f = need(a.payload, "force");
        if (!f.is_boolean()) bad_payload("force must be a boolean");
        approve(a.actor, f.get<bool>(), recorded.timestamp);
        break;
      }
      case ActionKind::plan:
        mark_planned(a.actor, need_string(a.payload, "plan_id"), need_string(a.payload, "plan_hash"),
                     recorded.timestamp);
        break;
      default:
        apply_edit(a, recorded.timestamp);
    }
  } catch (const Error& e) {
    if (e.code() == Errc::broken_chain) throw;
    broken(seq, std::string("entry does not re-apply: ") + e.what());
  }
  if (audit_line(audit_.back()) != audit_line(recorded)) {
    const auto& mine = audit_.back();
    std::string why = "regenerated entry differs";
    if (mine.pre_hash != recorded.pre_hash) {
      why = "pre_hash mismatch";
    } else if (mine.post_hash != recorded.post_hash) {
      why = "post_hash mismatch";
    } else if (mine.entry_hash != recorded.entry_hash) {
      why = "entry_hash mismatch";
    }
    broken(seq, why);
  }
}

ContestationSession replay(const SessionSeed& seed, std::span<const AuditEntry> audit) {
  DegreeAssignment initial;
  try {
    initial = score_all_options(seed.initial_graph, seed.config.solver, seed.config.aggregation);
  } catch (const NonConvergence& e) {
    throw Error(Errc::broken_chain, std::string("initial graph does not solve: ") + e.what(), {{"seq", 0}});
  }
  auto session = ContestationSession::open(seed, std::move(initial));
  for (const auto& entry : audit) session.replay_entry(entry);
  return session;
}

}  // namespace canoe
