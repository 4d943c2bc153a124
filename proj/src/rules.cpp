#include "canoe/rules.hpp"

#include "canoe/error.hpp"
#include "canoe/serialize.hpp"

#include <cstdlib>

#ifndef CANOE_DATA_DIR
#define CANOE_DATA_DIR "data"
#endif

namespace canoe {

std::string_view to_string(ComplexityLevel l) {
  switch (l) {
    case ComplexityLevel::low: return "low";
    case ComplexityLevel::moderate: return "moderate";
    case ComplexityLevel::high: return "high";
    case ComplexityLevel::very_high: return "very_high";
  }
  return "low";
}

ComplexityLevel parse_complexity(std::string_view s) {
  for (auto l : {ComplexityLevel::low, ComplexityLevel::moderate, ComplexityLevel::high, ComplexityLevel::very_high}) {
    if (to_string(l) == s) return l;
  }
  throw Error(Errc::validation, "unknown complexity level '" + std::string(s) + "'");
}

int feature_value(const PatientCase& c, std::string_view feature) {
  if (feature == "conditions_count") return static_cast<int>(c.conditions.size());
  if (feature == "medications_count") return static_cast<int>(c.medications.size());
  if (feature == "adl_impairments") return c.adl_impairments;
  if (feature == "iadl_impairments") return c.iadl_impairments;
  if (feature == "falls_90d") return c.falls_90d;
  if (feature == "hospitalizations_90d") return c.hospitalizations_90d;
  if (feature.starts_with("flag:")) return c.has(parse_flag(feature.substr(5))) ? 1 : 0;
  throw Error(Errc::validation, "unknown case feature '" + std::string(feature) + "'");
}

bool any_holds(const std::vector<Predicate>& preds, const PatientCase& c) {
  for (const auto& p : preds) {
    if (feature_value(c, p.feature) >= p.at_least) return true;
  }
  return false;
}

namespace {

// Probes the feature name against an empty case so typos fail at load time.
void check_feature(const std::string& feature) { (void)feature_value(PatientCase{}, feature); }

std::vector<Predicate> predicates_from_json(const nlohmann::json& arr) {
  std::vector<Predicate> out;
  for (const auto& p : arr) {
    Predicate pred{field::string(p, "feature"), field::integer(p, "at_least")};
    check_feature(pred.feature);
    if (pred.at_least < 1) throw Error(Errc::validation, "at_least must be >= 1");
    out.push_back(std::move(pred));
  }
  return out;
}

std::vector<Role> roles_from_json(const nlohmann::json& arr) {
  std::vector<Role> out;
  for (const auto& r : arr) {
    const Role role = parse_role(r.get<std::string>());
    if (!is_provider(role)) throw Error(Errc::validation, "roster rules may only name provider roles");
    out.push_back(role);
  }
  return out;
}

}  // namespace

ComplexityRubric rubric_from_json(const nlohmann::json& j) {
  field::check_version(j);
  ComplexityRubric rubric;
  for (const auto& t : field::required(j, "terms")) {
    RubricTerm term{field::string(t, "feature"), field::integer(t, "weight"), std::nullopt};
    check_feature(term.feature);
    // Non-negative weights keep the rubric monotone in every feature.
    if (term.weight < 0) throw Error(Errc::validation, "rubric weights must be >= 0");
    if (t.contains("at_least")) term.at_least = field::integer(t, "at_least");
    rubric.terms.push_back(std::move(term));
  }
  const auto& levels = field::required(j, "levels");
  if (levels.size() != 4) throw Error(Errc::validation, "rubric must define exactly four levels");
  for (std::size_t i = 0; i < 3; ++i) {
    if (parse_complexity(field::string(levels[i], "level")) != static_cast<ComplexityLevel>(i)) {
      throw Error(Errc::validation, "rubric levels must be listed low, moderate, high, very_high");
    }
    rubric.below[i] = field::integer(levels[i], "below");
    if (i > 0 && rubric.below[i] <= rubric.below[i - 1]) {
      throw Error(Errc::validation, "rubric level bounds must increase");
    }
  }
  return rubric;
}

RosterRules roster_rules_from_json(const nlohmann::json& j) {
  field::check_version(j);
  RosterRules rules;
  for (const auto& [level, roles] : field::required(j, "base").items()) {
    rules.base[parse_complexity(level)] = roles_from_json(roles);
  }
  if (rules.base.size() != 4) throw Error(Errc::validation, "roster rules need a base roster per level");
  for (const auto& t : field::required(j, "triggers")) {
    rules.triggers.push_back(TriggerRule{field::string(t, "name"), predicates_from_json(field::required(t, "when_any")),
                                         roles_from_json(field::required(t, "add"))});
  }
  return rules;
}

std::vector<OptionTemplate> option_templates_from_json(const nlohmann::json& j) {
  field::check_version(j);
  std::vector<OptionTemplate> out;
  for (const auto& t : field::required(j, "templates")) {
    OptionTemplate tpl;
    tpl.option = option_from_json(t);
    tpl.always = t.contains("always") && field::boolean(t, "always");
    if (t.contains("when_any")) tpl.when_any = predicates_from_json(t.at("when_any"));
    tpl.duration_minutes = field::integer(t, "duration_minutes");
    if (tpl.duration_minutes <= 0) throw Error(Errc::validation, "duration_minutes must be > 0");
    for (const auto& other : out) {
      if (other.option.option_id == tpl.option.option_id) {
        throw Error(Errc::duplicate_id, "duplicate option template '" + tpl.option.option_id + "'");
      }
    }
    out.push_back(std::move(tpl));
  }
  return out;
}

TierThresholds tiers_from_json(const nlohmann::json& j) {
  field::check_version(j);
  TierThresholds t{field::real(j, "recommended_high"), field::real(j, "recommended"), field::real(j, "conditional")};
  if (!(0.0 <= t.conditional && t.conditional <= t.recommended && t.recommended <= t.recommended_high &&
        t.recommended_high <= 1.0)) {
    throw Error(Errc::validation, "tier thresholds must satisfy 0 <= conditional <= recommended <= high <= 1");
  }
  return t;
}

nlohmann::json to_json(const TierThresholds& t) {
  return {{"format_version", kFormatVersion},
          {"recommended_high", t.recommended_high},
          {"recommended", t.recommended},
          {"conditional", t.conditional}};
}

RuleBook RuleBook::load(const std::filesystem::path& dir) {
  RuleBook book;
  book.rubric = rubric_from_json(read_json_file(dir / "complexity.json"));
  book.roster = roster_rules_from_json(read_json_file(dir / "roster.json"));
  book.options = option_templates_from_json(read_json_file(dir / "options.json"));
  book.tiers = tiers_from_json(read_json_file(dir / "tiers.json"));
  return book;
}

std::filesystem::path RuleBook::default_dir() {
  if (const char* env = std::getenv("CANOE_RULES_DIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::path(CANOE_DATA_DIR) / "rules";
}

const RuleBook& RuleBook::defaults() {
  static const RuleBook book = load(default_dir());
  return book;
}

int RuleBook::option_duration(const std::string& option_id) const {
  for (const auto& t : options) {
    if (t.option.option_id == option_id) return t.duration_minutes;
  }
  return 60;
}

std::filesystem::path default_sample_dir() { return std::filesystem::path(CANOE_DATA_DIR) / "sample"; }

}  // namespace canoe
