#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>

namespace canoe {

// Rounds to 9 significant digits, the precision of every persisted real.
// Idempotent; maps -0 to 0. Non-finite input throws Errc::validation.
double canonical_real(double v);

// Canonical JSON text: object keys sorted bytewise, no insignificant
// whitespace when indent < 0, floats printed with %.9g. Arrays are emitted in
// the order given; callers are responsible for id-ordering them.
std::string dump_canonical(const nlohmann::json& j, int indent = -1);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace canoe
