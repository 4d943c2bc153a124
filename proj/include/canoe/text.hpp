#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace canoe::text {

// Lowercased ASCII alphanumeric runs; everything else separates tokens.
std::vector<std::string> tokenize(std::string_view s);
std::set<std::string> token_set(std::string_view s);

// |query ∩ doc| / |query| over token sets; 0 when the query has no tokens.
double overlap_ratio(const std::set<std::string>& query, const std::set<std::string>& doc);

}  // namespace canoe::text
