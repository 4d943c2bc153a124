#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace canoe {

// The ten provider roles come first in declaration order; roster ordering and
// participation summaries follow it. The two human roles only ever appear as
// audit actors.
enum class Role {
  registered_nurse,
  pharmacist,
  general_practitioner,
  nutritionist,
  physical_therapist,
  occupational_therapist,
  psychiatrist,
  social_worker,
  home_health_aide,
  care_coordinator,
  human_reviewer,
  human_care_planner,
};

inline constexpr std::array<Role, 10> kProviderRoles = {
    Role::registered_nurse,   Role::pharmacist,        Role::general_practitioner,
    Role::nutritionist,       Role::physical_therapist, Role::occupational_therapist,
    Role::psychiatrist,       Role::social_worker,     Role::home_health_aide,
    Role::care_coordinator,
};

inline bool is_provider(Role r) { return r != Role::human_reviewer && r != Role::human_care_planner; }
inline bool is_human(Role r) { return !is_provider(r); }

enum class Flag { cognitive_impairment, depression, lives_alone, nutrition_risk };
enum class SourceType { guideline, case_record, assessment_note };
enum class Category { safety, mobility, medication, nutrition, psychosocial, coordination };
enum class Stance { support, challenge };
enum class Polarity { support, attack };
enum class ArgStatus { pending, accepted, rejected, modified, added };

std::string_view to_string(Role r);
std::string_view to_string(Flag f);
std::string_view to_string(SourceType s);
std::string_view to_string(Category c);
std::string_view to_string(Stance s);
std::string_view to_string(Polarity p);
std::string_view to_string(ArgStatus s);

// Parsers throw canoe::Error(Errc::validation) on unknown names.
Role parse_role(std::string_view s);
Flag parse_flag(std::string_view s);
SourceType parse_source_type(std::string_view s);
Category parse_category(std::string_view s);
Stance parse_stance(std::string_view s);
Polarity parse_polarity(std::string_view s);
ArgStatus parse_status(std::string_view s);

struct PatientCase {
  std::string case_id;
  int age = 0;
  std::vector<std::string> conditions;
  std::vector<std::string> medications;
  int adl_impairments = 0;   // 0..6
  int iadl_impairments = 0;  // 0..8
  int falls_90d = 0;
  int hospitalizations_90d = 0;
  std::set<Flag> flags;
  std::string narrative;
  std::string assessment_source;

  bool has(Flag f) const { return flags.count(f) != 0; }
  friend bool operator==(const PatientCase&, const PatientCase&) = default;
};

// Throws Errc::validation when counts are out of range or case_id is empty.
void validate(const PatientCase& c);

struct EvidenceDoc {
  std::string doc_id;
  std::string text;
  SourceType source_type = SourceType::guideline;
  double reliability = 0.0;
  double similarity = 0.0;
  friend bool operator==(const EvidenceDoc&, const EvidenceDoc&) = default;
};

struct CareOption {
  std::string option_id;
  std::string title;
  std::string description;
  Category category = Category::coordination;
  friend bool operator==(const CareOption&, const CareOption&) = default;
};

struct Argument {
  std::string arg_id;
  std::string content;
  Stance stance = Stance::support;
  Role role = Role::care_coordinator;
  std::string target_option;
  std::vector<std::string> cited_evidence;
  double tau = 0.0;
  bool tau_pinned = false;
  ArgStatus status = ArgStatus::pending;
  friend bool operator==(const Argument&, const Argument&) = default;
};

struct Relation {
  std::string source;
  std::string target;
  Polarity polarity = Polarity::support;
  double weight = 0.5;
  friend bool operator==(const Relation&, const Relation&) = default;
};

inline constexpr double kDefaultEdgeWeight = 0.5;

// Solver output: acceptability degree per live argument, aggregated score per
// option, plus convergence diagnostics.
struct DegreeAssignment {
  std::map<std::string, double> degrees;
  std::map<std::string, double> option_scores;
  int iterations_used = 0;
  double residual = 0.0;
  friend bool operator==(const DegreeAssignment&, const DegreeAssignment&) = default;
};

// Generated ids follow `{role}-{option_id}-{stance}-{seq}`; human additions
// use `h-{seq}`.
std::string generated_arg_id(Role role, std::string_view option_id, Stance stance, int seq);
std::string human_arg_id(int seq);

}  // namespace canoe
