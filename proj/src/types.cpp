#include "canoe/types.hpp"

#include "canoe/error.hpp"

#include <utility>

namespace canoe {
namespace {

template <typename E, std::size_t N>
using NameTable = std::array<std::pair<E, std::string_view>, N>;

constexpr NameTable<Role, 12> kRoleNames{{
    {Role::registered_nurse, "registered_nurse"},
    {Role::pharmacist, "pharmacist"},
    {Role::general_practitioner, "general_practitioner"},
    {Role::nutritionist, "nutritionist"},
    {Role::physical_therapist, "physical_therapist"},
    {Role::occupational_therapist, "occupational_therapist"},
    {Role::psychiatrist, "psychiatrist"},
    {Role::social_worker, "social_worker"},
    {Role::home_health_aide, "home_health_aide"},
    {Role::care_coordinator, "care_coordinator"},
    {Role::human_reviewer, "human_reviewer"},
    {Role::human_care_planner, "human_care_planner"},
}};

constexpr NameTable<Flag, 4> kFlagNames{{
    {Flag::cognitive_impairment, "cognitive_impairment"},
    {Flag::depression, "depression"},
    {Flag::lives_alone, "lives_alone"},
    {Flag::nutrition_risk, "nutrition_risk"},
}};

constexpr NameTable<SourceType, 3> kSourceNames{{
    {SourceType::guideline, "guideline"},
    {SourceType::case_record, "case_record"},
    {SourceType::assessment_note, "assessment_note"},
}};

constexpr NameTable<Category, 6> kCategoryNames{{
    {Category::safety, "safety"},
    {Category::mobility, "mobility"},
    {Category::medication, "medication"},
    {Category::nutrition, "nutrition"},
    {Category::psychosocial, "psychosocial"},
    {Category::coordination, "coordination"},
}};

constexpr NameTable<Stance, 2> kStanceNames{{{Stance::support, "support"}, {Stance::challenge, "challenge"}}};
constexpr NameTable<Polarity, 2> kPolarityNames{{{Polarity::support, "support"}, {Polarity::attack, "attack"}}};

constexpr NameTable<ArgStatus, 5> kStatusNames{{
    {ArgStatus::pending, "pending"},
    {ArgStatus::accepted, "accepted"},
    {ArgStatus::rejected, "rejected"},
    {ArgStatus::modified, "modified"},
    {ArgStatus::added, "added"},
}};

template <typename E, std::size_t N>
std::string_view name_of(const NameTable<E, N>& table, E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
E parse_name(const NameTable<E, N>& table, std::string_view s, std::string_view what) {
  for (const auto& [e, name] : table) {
    if (name == s) return e;
  }
  throw Error(Errc::validation, "unknown " + std::string(what) + ": '" + std::string(s) + "'");
}

}  // namespace

std::string_view to_string(Role r) { return name_of(kRoleNames, r); }
std::string_view to_string(Flag f) { return name_of(kFlagNames, f); }
std::string_view to_string(SourceType s) { return name_of(kSourceNames, s); }
std::string_view to_string(Category c) { return name_of(kCategoryNames, c); }
std::string_view to_string(Stance s) { return name_of(kStanceNames, s); }
std::string_view to_string(Polarity p) { return name_of(kPolarityNames, p); }
std::string_view to_string(ArgStatus s) { return name_of(kStatusNames, s); }

Role parse_role(std::string_view s) { return parse_name(kRoleNames, s, "role"); }
Flag parse_flag(std::string_view s) { return parse_name(kFlagNames, s, "flag"); }
SourceType parse_source_type(std::string_view s) { return parse_name(kSourceNames, s, "source_type"); }
Category parse_category(std::string_view s) { return parse_name(kCategoryNames, s, "category"); }
Stance parse_stance(std::string_view s) { return parse_name(kStanceNames, s, "stance"); }
Polarity parse_polarity(std::string_view s) { return parse_name(kPolarityNames, s, "polarity"); }
ArgStatus parse_status(std::string_view s) { return parse_name(kStatusNames, s, "status"); }

void validate(const PatientCase& c) {
  auto fail = [](const std::string& msg) { throw Error(Errc::validation, msg); };
  if (c.case_id.empty()) fail("case_id must be nonempty");
  if (c.age < 0) fail("age must be >= 0");
  if (c.adl_impairments < 0 || c.adl_impairments > 6) fail("adl_impairments must be in 0..6");
  if (c.iadl_impairments < 0 || c.iadl_impairments > 8) fail("iadl_impairments must be in 0..8");
  if (c.falls_90d < 0) fail("falls_90d must be >= 0");
  if (c.hospitalizations_90d < 0) fail("hospitalizations_90d must be >= 0");
}

std::string generated_arg_id(Role role, std::string_view option_id, Stance stance, int seq) {
  std::string id(to_string(role));
  id += '-';
  id += option_id;
  id += '-';
  id += to_string(stance);
  id += '-';
  id += std::to_string(seq);
  return id;
}

std::string human_arg_id(int seq) { return "h-" + std::to_string(seq); }

}  // namespace canoe
