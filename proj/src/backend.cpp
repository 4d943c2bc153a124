#include "canoe/canonical.hpp"
#include "canoe/error.hpp"
#include "canoe/pipeline.hpp"
#include "canoe/serialize.hpp"
#include "canoe/text.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace canoe {

// --- wire format ------------------------------------------------------------

nlohmann::json to_json(const BackendRequest& r) {
  nlohmann::json prior = nlohmann::json::array();
  for (const auto& a : r.prior_arguments) prior.push_back(to_json(a));
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& d : r.evidence) evidence.push_back(to_json(d));
  return {{"case", to_json(r.patient)},
          {"option", to_json(r.option)},
          {"role", std::string(to_string(r.role))},
          {"round", r.round},
          {"prior_arguments", prior},
          {"evidence", evidence}};
}

BackendRequest request_from_json(const nlohmann::json& j) {
  BackendRequest r;
  r.patient = case_from_json(field::required(j, "case"));
  r.option = option_from_json(field::required(j, "option"));
  r.role = parse_role(field::string(j, "role"));
  r.round = field::integer(j, "round");
  for (const auto& a : field::required(j, "prior_arguments")) r.prior_arguments.push_back(argument_from_json(a));
  for (const auto& d : field::required(j, "evidence")) r.evidence.push_back(evidence_from_json(d));
  return r;
}

namespace {

nlohmann::json draft_to_json(const DraftArgument& d) {
  return {{"content", d.content}, {"cited_evidence", d.cited_evidence}};
}

DraftArgument draft_from_json(const nlohmann::json& j) {
  DraftArgument d{field::string(j, "content"), field::strings(j, "cited_evidence")};
  if (d.content.empty()) throw Error(Errc::validation, "argument content must be nonempty");
  return d;
}

}  // namespace

nlohmann::json to_json(const BackendResponse& r) {
  nlohmann::json rels = nlohmann::json::array();
  for (const auto& rel : r.relations) {
    rels.push_back({{"source_ref", rel.source_ref},
                    {"target_ref", rel.target_ref},
                    {"polarity", std::string(to_string(rel.polarity))},
                    {"weight", rel.weight}});
  }
  return {{"support_argument", draft_to_json(r.support_argument)},
          {"challenge_argument", draft_to_json(r.challenge_argument)},
          {"relations", rels}};
}

BackendResponse response_from_json(const nlohmann::json& j) {
  try {
    BackendResponse r;
    r.support_argument = draft_from_json(field::required(j, "support_argument"));
    r.challenge_argument = draft_from_json(field::required(j, "challenge_argument"));
    if (j.contains("relations")) {
      for (const auto& rel : j.at("relations")) {
        DraftRelation d;
        d.source_ref = field::string(rel, "source_ref");
        d.target_ref = field::string(rel, "target_ref");
        d.polarity = parse_polarity(field::string(rel, "polarity"));
        d.weight = rel.contains("weight") ? field::real(rel, "weight") : kDefaultEdgeWeight;
        r.relations.push_back(std::move(d));
      }
    }
    return r;
  } catch (const Error& e) {
    throw Error(Errc::malformed_response, std::string("malformed backend response: ") + e.what());
  }
}

// --- scripted backend ---------------------------------------------------------

namespace {

std::string join(const std::vector<std::string>& items, std::size_t limit) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i > 0) out += i + 1 == std::min(items.size(), limit) ? " and " : ", ";
    out += items[i];
  }
  return out.empty() ? "no recorded items" : out;
}

std::string plural(int n, const char* noun) {
  return std::to_string(n) + " " + noun + (n == 1 ? "" : "s");
}

struct RoleVoice {
  const char* title;
  const char* lens;  // what the role weighs when objecting
};

RoleVoice voice(Role r) {
  switch (r) {
    case Role::registered_nurse: return {"Registered nurse", "nursing workload and daily monitoring"};
    case Role::pharmacist: return {"Pharmacist", "drug interactions and regimen burden"};
    case Role::general_practitioner: return {"General practitioner", "medical priorities across conditions"};
    case Role::nutritionist: return {"Nutritionist", "intake, appetite and weight"};
    case Role::physical_therapist: return {"Physical therapist", "balance, gait and exertion"};
    case Role::occupational_therapist: return {"Occupational therapist", "home layout and daily task demands"};
    case Role::psychiatrist: return {"Psychiatrist", "mood, cognition and willingness to engage"};
    case Role::social_worker: return {"Social worker", "family support, cost and living situation"};
    case Role::home_health_aide: return {"Home health aide", "hands on assistance during daily routines"};
    case Role::care_coordinator: return {"Care coordinator", "scheduling load and handoffs between providers"};
    default: return {"Reviewer", "overall plan fit"};
  }
}

// A case fact each role brings to the table.
std::string role_fact(Role r, const PatientCase& c) {
  switch (r) {
    case Role::registered_nurse:
      return plural(c.hospitalizations_90d, "hospitalization") + " in the last 90 days alongside " +
             join(c.conditions, 2);
    case Role::pharmacist:
      return plural(static_cast<int>(c.medications.size()), "active medication") + " including " +
             join(c.medications, 3);
    case Role::general_practitioner:
      return "active conditions include " + join(c.conditions, 3);
    case Role::nutritionist:
      return c.has(Flag::nutrition_risk) ? "nutrition risk is flagged in the assessment"
                                         : "no nutrition risk is flagged yet intake affects " + join(c.conditions, 1);
    case Role::physical_therapist:
      return plural(c.falls_90d, "fall") + " in the last 90 days with " + plural(c.adl_impairments, "ADL impairment");
    case Role::occupational_therapist:
      return plural(c.adl_impairments, "ADL impairment") + " and " + plural(c.iadl_impairments, "IADL impairment") +
             " affect tasks at home";
    case Role::psychiatrist:
      if (c.has(Flag::depression) && c.has(Flag::cognitive_impairment)) {
        return "depression and cognitive impairment are both flagged";
      }
      if (c.has(Flag::depression)) return "depression is flagged in the assessment";
      if (c.has(Flag::cognitive_impairment)) return "cognitive impairment is flagged in the assessment";
      return "no mood or cognition flag is recorded";
    case Role::social_worker:
      return c.has(Flag::lives_alone) ? "the client lives alone with limited informal support"
                                      : "the client lives with others who can help";
    case Role::home_health_aide:
      return plural(c.adl_impairments, "ADL impairment") + " mean daily routines need hands on help";
    case Role::care_coordinator:
      return "care spans " + plural(static_cast<int>(c.conditions.size()), "condition") + " and several providers";
    default:
      return "the assessment is on file";
  }
}

const char* category_benefit(Category cat) {
  switch (cat) {
    case Category::safety: return "It lowers injury risk at home where falls have occurred";
    case Category::mobility: return "It builds strength and balance so walking becomes safer";
    case Category::medication: return "It can cut adverse drug events and simplify the daily regimen";
    case Category::nutrition: return "It addresses intake and weight before further decline";
    case Category::psychosocial: return "It supports mood, engagement and adherence to the plan";
    case Category::coordination: return "It keeps providers aligned on goals and follow up";
  }
  return "";
}

const char* category_risk(Category cat) {
  switch (cat) {
    case Category::safety: return "installation cost and acceptance of home changes are uncertain";
    case Category::mobility: return "exertion may raise fall risk until balance improves";
    case Category::medication: return "regimen changes may confuse the client and need close follow up";
    case Category::nutrition: return "dietary changes may conflict with preferences and other conditions";
    case Category::psychosocial: return "the client may decline the referral and wait times can be long";
    case Category::coordination: return "added contacts increase burden on the client and the schedule";
  }
  return "";
}

// Evidence ranked for this option: overlap with the option text first, then
// the retrieval similarity, then doc_id.
std::vector<const EvidenceDoc*> rank_for_option(const BackendRequest& req) {
  const auto query = text::token_set(req.option.title + " " + req.option.description);
  std::vector<std::pair<double, const EvidenceDoc*>> ranked;
  for (const auto& doc : req.evidence) ranked.emplace_back(text::overlap_ratio(query, text::token_set(doc.text)), &doc);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    if (a.second->similarity != b.second->similarity) return a.second->similarity > b.second->similarity;
    return a.second->doc_id < b.second->doc_id;
  });
  std::vector<const EvidenceDoc*> out;
  for (const auto& [score, doc] : ranked) out.push_back(doc);
  return out;
}

std::string excerpt(const std::string& text, std::size_t words) {
  std::istringstream in(text);
  std::string word;
  std::string out;
  for (std::size_t i = 0; i < words && in >> word; ++i) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

// Highest tau among prior arguments on `option` with `stance`; ties go to the
// smallest arg_id.
const Argument* strongest_prior(const std::vector<Argument>& prior, const std::string& option, Stance stance) {
  const Argument* best = nullptr;
  for (const auto& a : prior) {
    if (a.target_option != option || a.stance != stance) continue;
    if (best == nullptr || a.tau > best->tau || (a.tau == best->tau && a.arg_id < best->arg_id)) best = &a;
  }
  return best;
}

}  // namespace

BackendResponse scripted_backend(const BackendRequest& req) {
  const auto who = voice(req.role);
  const auto fact = role_fact(req.role, req.patient);
  const auto ranked = rank_for_option(req);

  BackendResponse resp;
  std::string support = std::string(who.title) + " supports " + req.option.title + " for this client: " + fact + ". " +
                        category_benefit(req.option.category) + ".";
  if (!ranked.empty()) {
    support += " Evidence " + ranked[0]->doc_id + " notes: " + excerpt(ranked[0]->text, 14) + ".";
    resp.support_argument.cited_evidence.push_back(ranked[0]->doc_id);
  }
  resp.support_argument.content = std::move(support);

  std::string challenge = std::string(who.title) + " questions " + req.option.title + ": " +
                          category_risk(req.option.category) + ", and from the angle of " + who.lens +
                          " the benefit is not yet established.";
  if (ranked.size() > 1) {
    challenge += " See " + ranked[1]->doc_id + ".";
    resp.challenge_argument.cited_evidence.push_back(ranked[1]->doc_id);
  }
  resp.challenge_argument.content = std::move(challenge);

  if (req.round >= 2) {
    const auto& opt = req.option.option_id;
    if (const auto* ally = strongest_prior(req.prior_arguments, opt, Stance::support)) {
      resp.relations.push_back({std::string(kSupportRef), ally->arg_id, Polarity::support, kDefaultEdgeWeight});
    }
    if (const auto* rival = strongest_prior(req.prior_arguments, opt, Stance::challenge)) {
      resp.relations.push_back({std::string(kSupportRef), rival->arg_id, Polarity::attack, kDefaultEdgeWeight});
    }
  }
  return resp;
}

BackendResponse ScriptedBackend::argue(const BackendRequest& request) { return scripted_backend(request); }

// --- external backend ---------------------------------------------------------

HttpBackend::HttpBackend(std::string url, std::string token, std::chrono::seconds timeout)
    : token_(std::move(token)), timeout_(timeout) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(Errc::validation, "backend URL needs a scheme: " + url);
  const auto path_start = url.find('/', scheme + 3);
  host_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
}

HttpBackend HttpBackend::from_env() {
  const char* url = std::getenv("CANOE_BACKEND_URL");
  if (url == nullptr || *url == '\0') throw Error(Errc::validation, "CANOE_BACKEND_URL is not set");
  const char* token = std::getenv("CANOE_BACKEND_TOKEN");
  return HttpBackend(url, token == nullptr ? "" : token);
}

BackendResponse HttpBackend::argue(const BackendRequest& request) {
  httplib::Client client(host_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const auto body = dump_canonical(to_json(request));
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw Error(Errc::backend_failure, "backend request failed: " + httplib::to_string(res.error()),
                {{"role", std::string(to_string(request.role))}, {"option", request.option.option_id}});
  }
  if (res->status != 200) {
    throw Error(Errc::backend_failure, "backend replied HTTP " + std::to_string(res->status),
                {{"status", res->status}, {"body", res->body}});
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::malformed_response, std::string("backend reply is not JSON: ") + e.what());
  }
  return response_from_json(parsed);
}

std::unique_ptr<ArgumentBackend> make_backend(BackendKind kind) {
  if (kind == BackendKind::scripted) return std::make_unique<ScriptedBackend>();
  return std::make_unique<HttpBackend>(HttpBackend::from_env());
}

}  // namespace canoe
