#pragma once

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace canoe {

// Fine-grained failure reasons raised by the library. Each maps onto one of
// the six public API error classes (see api_code()).
enum class Errc {
  // argcore
  duplicate_id,
  unknown_option,
  unknown_argument,
  self_loop,
  duplicate_relation,
  negative_weight,
  // semantics
  non_convergence,
  // pipeline
  empty_corpus,
  backend_failure,
  malformed_response,
  // contestation
  unsolved_graph,
  wrong_phase,
  unknown_target,
  invalid_payload,
  pending_arguments,
  broken_chain,
  // plangen
  out_of_range,
  // generic
  validation,
  not_found,
  io,
};

// Public error classes exposed over HTTP and used for CLI exit codes.
enum class ApiCode { not_found, wrong_phase, validation, non_convergence, backend_failure, conflict };

std::string_view to_string(Errc e);
std::string_view to_string(ApiCode c);
ApiCode api_code(Errc e);
int http_status(Errc e);
int exit_code(Errc e);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  Errc code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  // {"code": <api code>, "reason": <errc>, "message": ..., "detail": ...}
  nlohmann::json to_json() const;

 private:
  Errc code_;
  nlohmann::json detail_;
};

}  // namespace canoe
