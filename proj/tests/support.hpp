// Shared helpers for the test binaries: scratch directories, seeded
// generators, independent oracles and the sample-session fixture.
#pragma once

#include "canoe/canonical.hpp"
#include "canoe/contestation.hpp"
#include "canoe/graph.hpp"
#include "canoe/pipeline.hpp"
#include "canoe/plangen.hpp"
#include "canoe/semantics.hpp"
#include "canoe/serialize.hpp"
#include "canoe/store.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

namespace canoe::test {

namespace fs = std::filesystem;
using Rng = std::mt19937_64;

inline const fs::path kSourceDir = CANOE_SOURCE_DIR;
inline const fs::path kSampleCase = kSourceDir / "data/sample/case.json";
inline const fs::path kSampleCorpus = kSourceDir / "data/sample/corpus";
inline const fs::path kGoldenDir = kSourceDir / "tests/golden";
inline constexpr const char* kFixedTime = "2026-11-01T10:00:00.000Z";

inline bool update_goldens() {
  const char* v = std::getenv("CANOE_UPDATE_GOLDEN");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("canoe-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
inline int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// --- graphs -----------------------------------------------------------------

struct GraphShape {
  int min_nodes = 1;
  int max_nodes = 12;
  int max_edges = 20;
  bool acyclic = true;
  double max_weight = 0.9;
  double max_incoming = -1;  // per-node cap on total incoming weight when > 0
  int options = 2;
};

inline std::string node_id(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "a%02d", i);
  return buf;
}

inline std::string option_id(int i) { return "o" + std::to_string(i + 1); }

inline ArgumentGraph random_graph(Rng& rng, const GraphShape& shape) {
  ArgumentGraph g;
  for (int o = 0; o < shape.options; ++o) {
    g.add_option({option_id(o), "option " + std::to_string(o + 1), "", Category::coordination});
  }
  const int n = pick(rng, shape.min_nodes, shape.max_nodes);
  for (int i = 0; i < n; ++i) {
    Argument a;
    a.arg_id = node_id(i);
    a.content = "argument " + std::to_string(i);
    a.stance = coin(rng) ? Stance::support : Stance::challenge;
    a.role = kProviderRoles[static_cast<std::size_t>(pick(rng, 0, 9))];
    a.target_option = option_id(pick(rng, 0, shape.options - 1));
    a.tau = uniform(rng, 0.0, 1.0);
    g.add_argument(a);
  }
  if (n < 2) return g;

  // Acyclic graphs only get edges that point forward in a random node order.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Relation> rels;
  std::map<std::string, double> incoming;
  const int edges = pick(rng, 0, shape.max_edges);
  for (int k = 0; k < edges * 3 && static_cast<int>(rels.size()) < edges; ++k) {
    int s = pick(rng, 0, n - 1);
    int t = pick(rng, 0, n - 1);
    if (s == t) continue;
    if (shape.acyclic) {
      const auto ps = std::find(order.begin(), order.end(), s) - order.begin();
      const auto pt = std::find(order.begin(), order.end(), t) - order.begin();
      if (ps > pt) std::swap(s, t);
    }
    Relation r{node_id(s), node_id(t), coin(rng) ? Polarity::support : Polarity::attack,
               uniform(rng, 0.0, shape.max_weight)};
    const bool dup = std::any_of(rels.begin(), rels.end(), [&](const Relation& x) {
      return x.source == r.source && x.target == r.target && x.polarity == r.polarity;
    });
    if (dup) continue;
    if (shape.max_incoming > 0) {
      const double room = shape.max_incoming - incoming[r.target];
      if (room <= 1e-6) continue;
      r.weight = std::min(r.weight, room * 0.999);
    }
    incoming[r.target] += canonical_real(r.weight);
    rels.push_back(r);
  }
  for (auto& r : rels) g.add_relation(r);
  return g;
}

// Independent evaluation of the fixed point on an acyclic graph: Kahn's
// topological order, each node evaluated once from its final parents.
inline std::map<std::string, double> topological_degrees(const ArgumentGraph& g) {
  std::map<std::string, int> indeg;
  std::map<std::string, std::vector<const Relation*>> in, out;
  for (const auto& [id, a] : g.arguments()) indeg[id] = 0;
  for (const auto& [key, r] : g.relations()) {
    ++indeg[r.target];
    in[r.target].push_back(&r);
    out[r.source].push_back(&r);
  }
  std::vector<std::string> ready;
  for (const auto& [id, d] : indeg) {
    if (d == 0) ready.push_back(id);
  }
  std::map<std::string, double> f;
  while (!ready.empty()) {
    const std::string x = ready.back();
    ready.pop_back();
    double v = g.argument(x).tau;
    for (const Relation* r : in[x]) {
      v += (r->polarity == Polarity::support ? 1.0 : -1.0) * r->weight * f.at(r->source);
    }
    f[x] = std::clamp(v, 0.0, 1.0);
    for (const Relation* r : out[x]) {
      if (--indeg[r->target] == 0) ready.push_back(r->target);
    }
  }
  return f;
}

inline double max_abs_diff(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  double m = 0.0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it == b.end()) return INFINITY;
    m = std::max(m, std::abs(v - it->second));
  }
  return a.size() == b.size() ? m : INFINITY;
}

// Two-argument fixtures: a supports/attacks b (weight 0.5), tau(a)=0.5, tau(b)=0.4.
inline ArgumentGraph two_node(Polarity p) {
  ArgumentGraph g;
  g.add_option({"o1", "option", "", Category::coordination});
  g.add_argument({"a", "first", Stance::support, Role::general_practitioner, "o1", {}, 0.5});
  g.add_argument({"b", "second", Stance::support, Role::registered_nurse, "o1", {}, 0.4});
  g.add_relation({"a", "b", p, 0.5});
  return g;
}

inline ArgumentGraph mutual_support() {
  ArgumentGraph g;
  g.add_option({"o1", "option", "", Category::coordination});
  g.add_argument({"a", "first", Stance::support, Role::general_practitioner, "o1", {}, 0.2});
  g.add_argument({"b", "second", Stance::support, Role::registered_nurse, "o1", {}, 0.2});
  g.add_relation({"a", "b", Polarity::support, 0.5});
  g.add_relation({"b", "a", Polarity::support, 0.5});
  return g;
}

// --- cases ------------------------------------------------------------------

inline PatientCase random_case(Rng& rng) {
  static const std::vector<std::string> conditions = {"hypertension", "diabetes", "copd", "heart failure",
                                                      "osteoarthritis", "dementia", "stroke", "ckd"};
  PatientCase c;
  c.case_id = "rc-" + std::to_string(pick(rng, 0, 999999));
  c.age = pick(rng, 65, 100);
  for (int i = pick(rng, 0, 6); i > 0; --i) c.conditions.push_back(conditions[static_cast<std::size_t>(pick(rng, 0, 7))]);
  for (int i = pick(rng, 0, 9); i > 0; --i) c.medications.push_back("med" + std::to_string(i));
  c.adl_impairments = pick(rng, 0, 6);
  c.iadl_impairments = pick(rng, 0, 8);
  c.falls_90d = pick(rng, 0, 3);
  c.hospitalizations_90d = pick(rng, 0, 2);
  for (Flag f : {Flag::cognitive_impairment, Flag::depression, Flag::lives_alone, Flag::nutrition_risk}) {
    if (coin(rng, 0.3)) c.flags.insert(f);
  }
  c.narrative = "generated case";
  c.assessment_source = "test";
  return c;
}

// A case that dominates `c`: every count is at least as large, flags a superset.
inline PatientCase dominating_case(Rng& rng, const PatientCase& c) {
  PatientCase d = c;
  for (int i = pick(rng, 0, 2); i > 0; --i) d.conditions.push_back("extra" + std::to_string(i));
  for (int i = pick(rng, 0, 3); i > 0; --i) d.medications.push_back("extra" + std::to_string(i));
  d.adl_impairments = std::min(6, d.adl_impairments + pick(rng, 0, 2));
  d.iadl_impairments = std::min(8, d.iadl_impairments + pick(rng, 0, 2));
  d.falls_90d += pick(rng, 0, 1);
  d.hospitalizations_90d += pick(rng, 0, 1);
  for (Flag f : {Flag::cognitive_impairment, Flag::depression, Flag::lives_alone, Flag::nutrition_risk}) {
    if (coin(rng, 0.2)) d.flags.insert(f);
  }
  return d;
}

// --- sample session ---------------------------------------------------------

inline PatientCase sample_case() { return case_from_json(read_json_file(kSampleCase)); }

// Phases 1-2 on the bundled sample case with the scripted backend, as `canoe run` does.
inline SessionDir make_sample_session(const fs::path& dir) {
  const auto& rules = RuleBook::defaults();
  ScriptedBackend backend;
  return run_session(dir, "aip-001-s1", sample_case(), load_corpus(kSampleCorpus), rules,
                     default_pipeline_config(rules), backend, default_schedule_settings(rules))
      .dir;
}

inline void copy_dir(const fs::path& from, const fs::path& to) {
  fs::create_directories(to);
  fs::copy(from, to, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

// Every regular file of a directory, name -> bytes.
inline std::map<std::string, std::string> dir_bytes(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().filename().string()] = read_text_file(e.path());
  }
  return out;
}

// --- scripted e2e steps -------------------------------------------------------

struct Step {
  std::string step;  // edit | revalidate | approve | plan
  nlohmann::json action;
  Role actor = Role::human_reviewer;
  bool force = false;
};

inline std::vector<Step> load_steps(const fs::path& file) {
  std::vector<Step> out;
  const auto doc = read_json_file(file);
  for (const auto& j : doc.at("steps")) {
    Step s;
    s.step = j.at("step").get<std::string>();
    if (s.step == "edit") {
      s.action = j.at("action");
    } else {
      s.actor = parse_role(j.at("actor").get<std::string>());
      s.force = j.value("force", false);
    }
    out.push_back(s);
  }
  return out;
}

inline std::vector<Step> e2e_steps() { return load_steps(kGoldenDir / "e2e_edits.json"); }

inline void apply_step(const SessionDir& dir, const Step& s, const Clock& clock) {
  if (s.step == "edit") {
    session_edit(dir, edit_action_from_json(s.action), clock);
  } else if (s.step == "revalidate") {
    session_revalidate(dir, s.actor, clock);
  } else if (s.step == "approve") {
    session_approve(dir, s.actor, s.force, clock);
  } else if (s.step == "plan") {
    session_plan(dir, s.actor, clock);
  }
}

// --- random edits -------------------------------------------------------------

inline std::string any_live(Rng& rng, const ArgumentGraph& g) {
  auto it = g.arguments().begin();
  std::advance(it, pick(rng, 0, static_cast<int>(g.size()) - 1));
  return it->first;
}

// One random edit against the current state. Mostly valid; some target missing
// arguments or carry bad payloads so that the error paths are exercised too.
inline EditAction random_edit(Rng& rng, const ContestationSession& s) {
  EditAction a;
  a.actor = coin(rng) ? Role::human_reviewer : Role::human_care_planner;
  const auto& g = s.graph();
  const int roll = pick(rng, 0, 99);
  if (g.empty() || roll < 12) {
    a.kind = ActionKind::add;
    const auto& opts = g.options();
    auto it = opts.begin();
    std::advance(it, pick(rng, 0, static_cast<int>(opts.size()) - 1));
    a.payload = {{"content", "reviewer insight number " + std::to_string(pick(rng, 0, 9999)) + " about falls"},
                 {"stance", coin(rng) ? "support" : "challenge"},
                 {"role", std::string(to_string(kProviderRoles[static_cast<std::size_t>(pick(rng, 0, 9))]))},
                 {"target_option", it->first}};
    if (coin(rng) && !s.seed().evidence.empty()) {
      a.payload["cited_evidence"] = {s.seed().evidence.front().doc_id};
    }
    return a;
  }
  a.target = roll < 16 ? "no-such-argument" : any_live(rng, g);
  if (roll < 30) {
    a.kind = ActionKind::accept;
  } else if (roll < 48) {
    a.kind = ActionKind::reject;
  } else if (roll < 62) {
    a.kind = ActionKind::modify;
    a.payload = {{"content", coin(rng, 0.9) ? "revised wording " + std::to_string(pick(rng, 0, 9999)) : ""}};
  } else if (roll < 76) {
    a.kind = ActionKind::pin_tau;
    a.payload = {{"tau", coin(rng, 0.9) ? uniform(rng, 0.0, 1.0) : 1.5}};
  } else {
    a.kind = ActionKind::add_relation;
    a.payload = {{"source", any_live(rng, g)},
                 {"polarity", coin(rng) ? "support" : "attack"},
                 {"weight", uniform(rng, 0.0, 0.45)}};
  }
  return a;
}

}  // namespace canoe::test

namespace canoe::test {

// Compares `text` with tests/golden/<name>; CANOE_UPDATE_GOLDEN=1 rewrites it.
inline bool matches_golden(const std::string& name, const std::string& text) {
  const auto file = kGoldenDir / name;
  if (update_goldens()) {
    fs::create_directories(file.parent_path());
    write_text_file_atomic(file, text);
    return true;
  }
  return fs::exists(file) && read_text_file(file) == text;
}

}  // namespace canoe::test
