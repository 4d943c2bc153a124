#pragma once

#include "canoe/graph.hpp"
#include "canoe/rules.hpp"
#include "canoe/semantics.hpp"
#include "canoe/types.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace canoe {

// --- phase 1 ----------------------------------------------------------------

struct ComplexityAssessment {
  ComplexityLevel level = ComplexityLevel::low;
  int raw_score = 0;
  friend bool operator==(const ComplexityAssessment&, const ComplexityAssessment&) = default;
};

ComplexityLevel level_for_score(int raw_score, const ComplexityRubric& rubric);
ComplexityAssessment assess_complexity(const PatientCase& c, const ComplexityRubric& rubric);
ComplexityAssessment assess_complexity(const PatientCase& c);  // bundled rubric

struct TeamRoster {
  std::vector<Role> roles;               // declaration order, no duplicates
  std::map<Role, std::string> triggers;  // rule that recruited each role
  friend bool operator==(const TeamRoster&, const TeamRoster&) = default;
};

TeamRoster recruit_team(const PatientCase& c, ComplexityLevel level, const RosterRules& rules);
TeamRoster recruit_team(const PatientCase& c, ComplexityLevel level);

// Query text describing the case: conditions, flags and narrative.
std::string case_query(const PatientCase& c);

// Scores every document by token overlap with the query, writes the score into
// `similarity`, and returns the top_k by (similarity desc, doc_id asc).
// EmptyCorpus; Errc::validation when top_k < 1.
std::vector<EvidenceDoc> retrieve_evidence(const std::string& query, const std::vector<EvidenceDoc>& corpus,
                                           int top_k);

// Directory with manifest.json listing {doc_id, file, source_type, reliability}.
std::vector<EvidenceDoc> load_corpus(const std::filesystem::path& dir);

std::vector<CareOption> generate_options(const PatientCase& c, const std::vector<OptionTemplate>& templates);
std::vector<CareOption> generate_options(const PatientCase& c);

// --- phase 2 ----------------------------------------------------------------

enum class BackendKind { scripted, external };
std::string_view to_string(BackendKind k);
BackendKind parse_backend_kind(std::string_view s);

struct DebateConfig {
  int rounds = 1;
  BackendKind backend = BackendKind::scripted;
  int retrieval_top_k = 8;
  bool heuristic_linker = false;
  int max_parallel = 4;  // concurrent backend calls within a round
  friend bool operator==(const DebateConfig&, const DebateConfig&) = default;
};

void validate(const DebateConfig& cfg);

struct BackendRequest {
  PatientCase patient;
  CareOption option;
  Role role = Role::care_coordinator;
  int round = 1;
  std::vector<Argument> prior_arguments;
  std::vector<EvidenceDoc> evidence;
};

struct DraftArgument {
  std::string content;
  std::vector<std::string> cited_evidence;
};

// Relation endpoints are either "$support" / "$challenge" (the arguments of
// the same response) or the arg_id of a prior argument.
struct DraftRelation {
  std::string source_ref;
  std::string target_ref;
  Polarity polarity = Polarity::support;
  double weight = kDefaultEdgeWeight;
};

struct BackendResponse {
  DraftArgument support_argument;
  DraftArgument challenge_argument;
  std::vector<DraftRelation> relations;
};

inline constexpr std::string_view kSupportRef = "$support";
inline constexpr std::string_view kChallengeRef = "$challenge";

nlohmann::json to_json(const BackendRequest& r);
BackendRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BackendResponse& r);
BackendResponse response_from_json(const nlohmann::json& j);  // MalformedResponse

class ArgumentBackend {
 public:
  virtual ~ArgumentBackend() = default;
  // Must be safe to call concurrently for distinct requests.
  virtual BackendResponse argue(const BackendRequest& request) = 0;
};

// Deterministic template-driven stand-in for role agents.
class ScriptedBackend final : public ArgumentBackend {
 public:
  BackendResponse argue(const BackendRequest& request) override;
};

BackendResponse scripted_backend(const BackendRequest& request);

// POSTs the request JSON to `url` and parses the response. One attempt, no
// retries. Non-200 replies and transport errors raise BackendFailure; bodies
// that do not match the response schema raise MalformedResponse.
class HttpBackend final : public ArgumentBackend {
 public:
  HttpBackend(std::string url, std::string token, std::chrono::seconds timeout = std::chrono::seconds(30));
  // Reads CANOE_BACKEND_URL and CANOE_BACKEND_TOKEN.
  static HttpBackend from_env();
  BackendResponse argue(const BackendRequest& request) override;

 private:
  std::string host_;
  std::string path_;
  std::string token_;
  std::chrono::seconds timeout_;
};

std::unique_ptr<ArgumentBackend> make_backend(BackendKind kind);

struct DebateResult {
  ArgumentGraph graph;
  std::vector<std::string> warnings;
};

// Runs `rounds` rounds; in each round every (option, role) pair is sent to the
// backend with the arguments of earlier rounds and the retrieved evidence.
// Responses are inserted in option-then-role order regardless of completion
// order, with tau from score_intrinsic. Unresolvable relation refs are
// dropped and reported in `warnings`. Any backend error aborts the debate.
DebateResult run_debate(const PatientCase& c, const TeamRoster& roster, const std::vector<CareOption>& options,
                        const std::vector<EvidenceDoc>& evidence, const DebateConfig& cfg, ArgumentBackend& backend,
                        const ScorerWeights& weights = {});

// Same-option, same-stance arguments sharing a citation get a weak support
// edge (later arg_id supports earlier), weight kLinkerWeight.
inline constexpr double kLinkerWeight = 0.25;
void link_cocitations(ArgumentGraph& graph, std::vector<std::string>& warnings);

// --- phases 1 and 2 end to end ----------------------------------------------

struct PipelineConfig {
  DebateConfig debate;
  SolverConfig solver;
  AggregationConfig aggregation;
  ScorerWeights scorer;
  TierThresholds tiers;
  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

nlohmann::json to_json(const PipelineConfig& cfg);
PipelineConfig pipeline_config_from_json(const nlohmann::json& j);

struct PipelineResult {
  ComplexityAssessment complexity;
  TeamRoster roster;
  std::vector<EvidenceDoc> evidence;
  std::vector<CareOption> options;
  ArgumentGraph graph;
  DegreeAssignment degrees;
  std::vector<std::string> warnings;
};

// assess -> recruit -> retrieve -> generate options -> debate -> solve.
PipelineResult run_pipeline(const PatientCase& c, const std::vector<EvidenceDoc>& corpus, const RuleBook& rules,
                            const PipelineConfig& cfg, ArgumentBackend& backend);

nlohmann::json team_to_json(const ComplexityAssessment& complexity, const TeamRoster& roster,
                            const std::vector<std::string>& warnings);

}  // namespace canoe
