#include "canoe/error.hpp"
#include "canoe/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <future>
#include <set>

namespace canoe {
namespace {

struct Call {
  const CareOption* option;
  Role role;
  BackendResponse response;
  std::exception_ptr failure;
};

void invoke(ArgumentBackend& backend, const BackendRequest& req, Call& call) {
  try {
    call.response = backend.argue(req);
  } catch (const Error&) {
    call.failure = std::current_exception();
  } catch (const std::exception& e) {
    call.failure = std::make_exception_ptr(Error(Errc::backend_failure, std::string("backend error: ") + e.what()));
  }
}

std::string call_label(const Call& c, int round) {
  return "(" + std::string(to_string(c.role)) + ", " + c.option->option_id + ", round " + std::to_string(round) + ")";
}

}  // namespace

DebateResult run_debate(const PatientCase& c, const TeamRoster& roster, const std::vector<CareOption>& options,
                        const std::vector<EvidenceDoc>& evidence, const DebateConfig& cfg, ArgumentBackend& backend,
                        const ScorerWeights& weights) {
  validate(cfg);
  validate(weights);
  if (roster.roles.empty()) throw Error(Errc::validation, "roster must be nonempty");
  if (options.empty()) throw Error(Errc::validation, "options must be nonempty");

  DebateResult result;
  for (const auto& opt : options) result.graph.add_option(opt);
  std::set<std::string> known_docs;
  for (const auto& d : evidence) known_docs.insert(d.doc_id);

  for (int round = 1; round <= cfg.rounds; ++round) {
    std::vector<Argument> prior;
    for (const auto& [id, arg] : result.graph.arguments()) prior.push_back(arg);
    const std::set<std::string> prior_ids = [&] {
      std::set<std::string> ids;
      for (const auto& a : prior) ids.insert(a.arg_id);
      return ids;
    }();

    std::vector<Call> calls;
    std::vector<BackendRequest> requests;
    for (const auto& opt : options) {
      for (Role role : roster.roles) {
        calls.push_back(Call{&opt, role, {}, nullptr});
        requests.push_back(BackendRequest{c, opt, role, round, prior, evidence});
      }
    }

    // Calls may complete in any order; insertion below follows `calls`.
    const auto batch = static_cast<std::size_t>(cfg.max_parallel);
    for (std::size_t start = 0; start < calls.size(); start += batch) {
      const auto end = std::min(calls.size(), start + batch);
      if (end - start == 1) {
        invoke(backend, requests[start], calls[start]);
        continue;
      }
      std::vector<std::future<void>> pending;
      for (auto i = start; i < end; ++i) {
        pending.push_back(std::async(std::launch::async, [&, i] { invoke(backend, requests[i], calls[i]); }));
      }
      for (auto& f : pending) f.get();
    }
    for (const auto& call : calls) {
      if (call.failure) std::rethrow_exception(call.failure);
    }

    for (auto& call : calls) {
      const auto label = call_label(call, round);
      auto make = [&](const DraftArgument& draft, Stance stance) {
        Argument arg;
        arg.arg_id = generated_arg_id(call.role, call.option->option_id, stance, round);
        arg.content = draft.content;
        arg.stance = stance;
        arg.role = call.role;
        arg.target_option = call.option->option_id;
        for (const auto& doc : draft.cited_evidence) {
          if (known_docs.count(doc) != 0) {
            arg.cited_evidence.push_back(doc);
          } else {
            result.warnings.push_back("citation dropped: unknown doc '" + doc + "' in " + label);
          }
        }
        arg.tau = score_intrinsic(arg, c, evidence, weights);
        return arg;
      };
      const auto support = make(call.response.support_argument, Stance::support);
      const auto challenge = make(call.response.challenge_argument, Stance::challenge);
      try {
        result.graph.add_argument(support);
        result.graph.add_argument(challenge);
      } catch (const Error& e) {
        throw Error(Errc::malformed_response, "cannot insert arguments for " + label + ": " + e.what());
      }

      auto resolve = [&](const std::string& ref) -> std::string {
        if (ref == kSupportRef) return support.arg_id;
        if (ref == kChallengeRef) return challenge.arg_id;
        return prior_ids.count(ref) != 0 ? ref : std::string();
      };
      for (const auto& draft : call.response.relations) {
        const auto source = resolve(draft.source_ref);
        const auto target = resolve(draft.target_ref);
        if (source.empty() || target.empty()) {
          result.warnings.push_back("relation dropped: unresolved ref '" +
                                    (source.empty() ? draft.source_ref : draft.target_ref) + "' in " + label);
          continue;
        }
        try {
          result.graph.add_relation(Relation{source, target, draft.polarity, draft.weight});
        } catch (const Error& e) {
          result.warnings.push_back("relation dropped: " + std::string(e.what()) + " in " + label);
        }
      }
    }
  }

  if (cfg.heuristic_linker) link_cocitations(result.graph, result.warnings);
  return result;
}

void link_cocitations(ArgumentGraph& graph, std::vector<std::string>& warnings) {
  std::vector<const Argument*> args;
  for (const auto& [id, a] : graph.arguments()) args.push_back(&a);
  std::vector<Relation> links;
  for (std::size_t i = 0; i < args.size(); ++i) {
    for (std::size_t j = i + 1; j < args.size(); ++j) {
      const auto& a = *args[i];
      const auto& b = *args[j];
      if (a.target_option != b.target_option || a.stance != b.stance) continue;
      const bool shared = std::any_of(a.cited_evidence.begin(), a.cited_evidence.end(), [&](const std::string& d) {
        return std::find(b.cited_evidence.begin(), b.cited_evidence.end(), d) != b.cited_evidence.end();
      });
      // Linker edges always point toward the smaller id, so they never close a
      // cycle among themselves.
      if (shared) links.push_back(Relation{b.arg_id, a.arg_id, Polarity::support, kLinkerWeight});
    }
  }
  for (auto& rel : links) {
    try {
      graph.add_relation(std::move(rel));
    } catch (const Error& e) {
      warnings.push_back(std::string("linker edge skipped: ") + e.what());
    }
  }
}

}  // namespace canoe
