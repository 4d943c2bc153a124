#include "canoe/clock.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>

namespace canoe {

Clock system_clock() {
  return [] {
    const auto now = std::chrono::system_clock::now();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::array<char, 80> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
    return std::string(buf.data());
  };
}

Clock fixed_clock(std::string timestamp) {
  return [ts = std::move(timestamp)] { return ts; };
}

Clock clock_from_env() {
  if (const char* env = std::getenv("CANOE_FIXED_CLOCK"); env != nullptr && *env != '\0') return fixed_clock(env);
  return system_clock();
}

}  // namespace canoe
