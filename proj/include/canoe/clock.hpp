#pragma once

#include <functional>
#include <string>

namespace canoe {

// Source of UTC timestamps, "YYYY-MM-DDTHH:MM:SS.mmmZ".
using Clock = std::function<std::string()>;

Clock system_clock();
Clock fixed_clock(std::string timestamp);
// fixed_clock($CANOE_FIXED_CLOCK) when the variable is set, system_clock() otherwise.
Clock clock_from_env();

}  // namespace canoe
