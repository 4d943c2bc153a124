#include "canoe/pipeline.hpp"

#include "canoe/canonical.hpp"
#include "canoe/error.hpp"
#include "canoe/serialize.hpp"
#include "canoe/text.hpp"

#include <algorithm>

namespace canoe {

ComplexityLevel level_for_score(int raw_score, const ComplexityRubric& rubric) {
  if (raw_score < rubric.below[0]) return ComplexityLevel::low;
  if (raw_score < rubric.below[1]) return ComplexityLevel::moderate;
  if (raw_score < rubric.below[2]) return ComplexityLevel::high;
  return ComplexityLevel::very_high;
}

ComplexityAssessment assess_complexity(const PatientCase& c, const ComplexityRubric& rubric) {
  int score = 0;
  for (const auto& term : rubric.terms) {
    const int v = feature_value(c, term.feature);
    if (term.at_least) {
      score += v >= *term.at_least ? term.weight : 0;
    } else {
      score += term.weight * v;
    }
  }
  return {level_for_score(score, rubric), score};
}

ComplexityAssessment assess_complexity(const PatientCase& c) {
  return assess_complexity(c, RuleBook::defaults().rubric);
}

TeamRoster recruit_team(const PatientCase& c, ComplexityLevel level, const RosterRules& rules) {
  TeamRoster roster;
  auto add = [&](Role r, const std::string& why) { roster.triggers.emplace(r, why); };
  if (auto it = rules.base.find(level); it != rules.base.end()) {
    for (Role r : it->second) add(r, "base:" + std::string(to_string(level)));
  }
  for (const auto& rule : rules.triggers) {
    if (!any_holds(rule.when_any, c)) continue;
    for (Role r : rule.add) add(r, rule.name);
  }
  add(Role::care_coordinator, "required");
  // std::map<Role, ...> iterates in enum declaration order.
  for (const auto& [role, why] : roster.triggers) roster.roles.push_back(role);
  return roster;
}

TeamRoster recruit_team(const PatientCase& c, ComplexityLevel level) {
  return recruit_team(c, level, RuleBook::defaults().roster);
}

std::string case_query(const PatientCase& c) {
  std::string q;
  for (const auto& cond : c.conditions) q += cond + " ";
  for (Flag f : c.flags) q += std::string(to_string(f)) + " ";
  q += c.narrative;
  return q;
}

std::vector<EvidenceDoc> retrieve_evidence(const std::string& query, const std::vector<EvidenceDoc>& corpus,
                                           int top_k) {
  if (top_k < 1) throw Error(Errc::validation, "top_k must be >= 1");
  if (corpus.empty()) throw Error(Errc::empty_corpus, "evidence corpus is empty");
  const auto q = text::token_set(query);
  std::vector<EvidenceDoc> scored = corpus;
  for (auto& doc : scored) doc.similarity = canonical_real(text::overlap_ratio(q, text::token_set(doc.text)));
  std::sort(scored.begin(), scored.end(), [](const EvidenceDoc& a, const EvidenceDoc& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.doc_id < b.doc_id;
  });
  if (scored.size() > static_cast<std::size_t>(top_k)) scored.resize(static_cast<std::size_t>(top_k));
  return scored;
}

std::vector<EvidenceDoc> load_corpus(const std::filesystem::path& dir) {
  const auto manifest = read_json_file(dir / "manifest.json");
  field::check_version(manifest);
  std::vector<EvidenceDoc> docs;
  for (const auto& entry : field::required(manifest, "documents")) {
    EvidenceDoc doc;
    doc.doc_id = field::string(entry, "doc_id");
    doc.source_type = parse_source_type(field::string(entry, "source_type"));
    doc.reliability = canonical_real(field::real(entry, "reliability"));
    if (!(doc.reliability >= 0.0 && doc.reliability <= 1.0)) {
      throw Error(Errc::validation, "reliability of '" + doc.doc_id + "' must lie in [0,1]");
    }
    doc.text = read_text_file(dir / field::string(entry, "file"));
    for (const auto& d : docs) {
      if (d.doc_id == doc.doc_id) throw Error(Errc::duplicate_id, "duplicate doc_id '" + doc.doc_id + "'");
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<CareOption> generate_options(const PatientCase& c, const std::vector<OptionTemplate>& templates) {
  std::vector<CareOption> out;
  for (const auto& t : templates) {
    if (t.always || any_holds(t.when_any, c)) out.push_back(t.option);
  }
  return out;
}

std::vector<CareOption> generate_options(const PatientCase& c) {
  return generate_options(c, RuleBook::defaults().options);
}

std::string_view to_string(BackendKind k) { return k == BackendKind::scripted ? "scripted" : "external"; }

BackendKind parse_backend_kind(std::string_view s) {
  if (s == "scripted") return BackendKind::scripted;
  if (s == "external") return BackendKind::external;
  throw Error(Errc::validation, "unknown backend '" + std::string(s) + "'");
}

void validate(const DebateConfig& cfg) {
  if (cfg.rounds < 1) throw Error(Errc::validation, "rounds must be >= 1");
  if (cfg.retrieval_top_k < 1) throw Error(Errc::validation, "retrieval_top_k must be >= 1");
  if (cfg.max_parallel < 1) throw Error(Errc::validation, "max_parallel must be >= 1");
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  return {
      {"format_version", kFormatVersion},
      {"debate",
       {{"rounds", cfg.debate.rounds},
        {"backend", std::string(to_string(cfg.debate.backend))},
        {"retrieval_top_k", cfg.debate.retrieval_top_k},
        {"heuristic_linker", cfg.debate.heuristic_linker},
        {"max_parallel", cfg.debate.max_parallel}}},
      {"solver",
       {{"squash", std::string(to_string(cfg.solver.squash))},
        {"logistic_k", cfg.solver.logistic_k},
        {"damping", cfg.solver.damping},
        {"tolerance", cfg.solver.tolerance},
        {"max_iterations", cfg.solver.max_iterations}}},
      {"aggregation", {{"temperature", cfg.aggregation.temperature}}},
      {"scorer",
       {{"w_relevance", cfg.scorer.w_relevance},
        {"w_consistency", cfg.scorer.w_consistency},
        {"w_transparency", cfg.scorer.w_transparency}}},
      {"tiers",
       {{"recommended_high", cfg.tiers.recommended_high},
        {"recommended", cfg.tiers.recommended},
        {"conditional", cfg.tiers.conditional}}},
  };
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j) {
  field::check_version(j);
  PipelineConfig cfg;
  const auto& d = field::required(j, "debate");
  cfg.debate.rounds = field::integer(d, "rounds");
  cfg.debate.backend = parse_backend_kind(field::string(d, "backend"));
  cfg.debate.retrieval_top_k = field::integer(d, "retrieval_top_k");
  cfg.debate.heuristic_linker = field::boolean(d, "heuristic_linker");
  cfg.debate.max_parallel = field::integer(d, "max_parallel");
  const auto& s = field::required(j, "solver");
  cfg.solver.squash = parse_squash(field::string(s, "squash"));
  cfg.solver.logistic_k = field::real(s, "logistic_k");
  cfg.solver.damping = field::real(s, "damping");
  cfg.solver.tolerance = field::real(s, "tolerance");
  cfg.solver.max_iterations = field::integer(s, "max_iterations");
  cfg.aggregation.temperature = field::real(field::required(j, "aggregation"), "temperature");
  const auto& w = field::required(j, "scorer");
  cfg.scorer.w_relevance = field::real(w, "w_relevance");
  cfg.scorer.w_consistency = field::real(w, "w_consistency");
  cfg.scorer.w_transparency = field::real(w, "w_transparency");
  auto tiers = field::required(j, "tiers");
  tiers["format_version"] = kFormatVersion;
  cfg.tiers = tiers_from_json(tiers);
  validate(cfg.debate);
  validate(cfg.solver);
  validate(cfg.aggregation);
  validate(cfg.scorer);
  return cfg;
}

PipelineResult run_pipeline(const PatientCase& c, const std::vector<EvidenceDoc>& corpus, const RuleBook& rules,
                            const PipelineConfig& cfg, ArgumentBackend& backend) {
  validate(c);
  PipelineResult r;
  r.complexity = assess_complexity(c, rules.rubric);
  r.roster = recruit_team(c, r.complexity.level, rules.roster);
  r.evidence = retrieve_evidence(case_query(c), corpus, cfg.debate.retrieval_top_k);
  r.options = generate_options(c, rules.options);
  auto debate = run_debate(c, r.roster, r.options, r.evidence, cfg.debate, backend, cfg.scorer);
  r.graph = std::move(debate.graph);
  r.warnings = std::move(debate.warnings);
  r.degrees = score_all_options(r.graph, cfg.solver, cfg.aggregation);
  return r;
}

nlohmann::json team_to_json(const ComplexityAssessment& complexity, const TeamRoster& roster,
                            const std::vector<std::string>& warnings) {
  nlohmann::json roles = nlohmann::json::array();
  for (Role r : roster.roles) roles.push_back(std::string(to_string(r)));
  nlohmann::json triggers = nlohmann::json::object();
  for (const auto& [r, why] : roster.triggers) triggers[std::string(to_string(r))] = why;
  return {{"format_version", kFormatVersion},
          {"complexity", {{"level", std::string(to_string(complexity.level))}, {"raw_score", complexity.raw_score}}},
          {"roster", roles},
          {"triggers", triggers},
          {"warnings", warnings}};
}

}  // namespace canoe
