#pragma once

#include "canoe/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace canoe {

enum class ComplexityLevel { low, moderate, high, very_high };
std::string_view to_string(ComplexityLevel l);
ComplexityLevel parse_complexity(std::string_view s);

// Case features addressable from rule files: conditions_count,
// medications_count, adl_impairments, iadl_impairments, falls_90d,
// hospitalizations_90d and flag:<name> (0 or 1).
int feature_value(const PatientCase& c, std::string_view feature);

struct Predicate {
  std::string feature;
  int at_least = 1;
};

// True when any predicate holds; an empty list never holds.
bool any_holds(const std::vector<Predicate>& preds, const PatientCase& c);

struct RubricTerm {
  std::string feature;
  int weight = 0;
  std::optional<int> at_least;  // indicator term when set, linear otherwise
};

struct ComplexityRubric {
  std::vector<RubricTerm> terms;
  // Ascending exclusive upper bounds for low, moderate, high; anything at or
  // above the last bound is very_high.
  std::array<int, 3> below{6, 13, 21};
};

struct TriggerRule {
  std::string name;
  std::vector<Predicate> when_any;
  std::vector<Role> add;
};

struct RosterRules {
  std::map<ComplexityLevel, std::vector<Role>> base;
  std::vector<TriggerRule> triggers;
};

struct OptionTemplate {
  CareOption option;
  bool always = false;
  std::vector<Predicate> when_any;
  int duration_minutes = 60;
};

struct TierThresholds {
  double recommended_high = 0.75;
  double recommended = 0.60;
  double conditional = 0.45;
  friend bool operator==(const TierThresholds&, const TierThresholds&) = default;
};

// The auditable rule tables shipped under data/rules.
struct RuleBook {
  ComplexityRubric rubric;
  RosterRules roster;
  std::vector<OptionTemplate> options;
  TierThresholds tiers;

  // Reads complexity.json, roster.json, options.json and tiers.json.
  static RuleBook load(const std::filesystem::path& dir);
  // $CANOE_RULES_DIR if set, else the data/rules directory of the source tree.
  static std::filesystem::path default_dir();
  static const RuleBook& defaults();

  int option_duration(const std::string& option_id) const;
};

ComplexityRubric rubric_from_json(const nlohmann::json& j);
RosterRules roster_rules_from_json(const nlohmann::json& j);
std::vector<OptionTemplate> option_templates_from_json(const nlohmann::json& j);
TierThresholds tiers_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TierThresholds& t);

// Directory holding the bundled sample case, corpus and calendar.
std::filesystem::path default_sample_dir();

}  // namespace canoe
