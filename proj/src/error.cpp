#include "canoe/error.hpp"

namespace canoe {

std::string_view to_string(Errc e) {
  switch (e) {
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::unknown_option: return "UnknownOption";
    case Errc::unknown_argument: return "UnknownArgument";
    case Errc::self_loop: return "SelfLoop";
    case Errc::duplicate_relation: return "DuplicateRelation";
    case Errc::negative_weight: return "NegativeWeight";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::backend_failure: return "BackendFailure";
    case Errc::malformed_response: return "MalformedResponse";
    case Errc::unsolved_graph: return "UnsolvedGraph";
    case Errc::wrong_phase: return "WrongPhase";
    case Errc::unknown_target: return "UnknownTarget";
    case Errc::invalid_payload: return "InvalidPayload";
    case Errc::pending_arguments: return "PendingArguments";
    case Errc::broken_chain: return "BrokenChain";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::validation: return "Validation";
    case Errc::not_found: return "NotFound";
    case Errc::io: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(ApiCode c) {
  switch (c) {
    case ApiCode::not_found: return "not_found";
    case ApiCode::wrong_phase: return "wrong_phase";
    case ApiCode::validation: return "validation";
    case ApiCode::non_convergence: return "non_convergence";
    case ApiCode::backend_failure: return "backend_failure";
    case ApiCode::conflict: return "conflict";
  }
  return "validation";
}

ApiCode api_code(Errc e) {
  switch (e) {
    case Errc::not_found:
    case Errc::unknown_target:
      return ApiCode::not_found;
    case Errc::wrong_phase:
      return ApiCode::wrong_phase;
    case Errc::non_convergence:
      return ApiCode::non_convergence;
    case Errc::backend_failure:
    case Errc::malformed_response:
      return ApiCode::backend_failure;
    case Errc::duplicate_id:
    case Errc::duplicate_relation:
    case Errc::pending_arguments:
    case Errc::broken_chain:
      return ApiCode::conflict;
    default:
      return ApiCode::validation;
  }
}

int http_status(Errc e) {
  switch (api_code(e)) {
    case ApiCode::not_found: return 404;
    case ApiCode::wrong_phase:
    case ApiCode::conflict: return 409;
    case ApiCode::validation: return e == Errc::io ? 500 : 422;
    case ApiCode::non_convergence:
    case ApiCode::backend_failure: return 500;
  }
  return 500;
}

int exit_code(Errc e) {
  switch (e) {
    case Errc::wrong_phase:
    case Errc::pending_arguments:
      return 3;
    case Errc::non_convergence: return 4;
    case Errc::backend_failure:
    case Errc::malformed_response:
      return 5;
    case Errc::broken_chain: return 6;
    case Errc::io: return 1;
    default: return 2;
  }
}

nlohmann::json Error::to_json() const {
  return {{"code", std::string(to_string(api_code(code_)))},
          {"reason", std::string(to_string(code_))},
          {"message", what()},
          {"detail", detail_}};
}

}  // namespace canoe
