#include "canoe/text.hpp"

namespace canoe::text {

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current += static_cast<char>(c);
    } else if (c >= 'A' && c <= 'Z') {
      current += static_cast<char>(c - 'A' + 'a');
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::set<std::string> token_set(std::string_view s) {
  auto tokens = tokenize(s);
  return {tokens.begin(), tokens.end()};
}

double overlap_ratio(const std::set<std::string>& query, const std::set<std::string>& doc) {
  if (query.empty()) return 0.0;
  std::size_t shared = 0;
  for (const auto& t : query) shared += doc.count(t);
  return static_cast<double>(shared) / static_cast<double>(query.size());
}

}  // namespace canoe::text
