#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace ctbench {

using Timestamp = std::chrono::sys_seconds;

inline constexpr std::chrono::seconds kHour{3600};

/// Accepts ISO-8601 UTC ("2021-03-04T05:00:00Z", "2021-03-04 05:00:00",
/// optional fractional seconds / trailing Z) or integer epoch milliseconds.
Timestamp parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string format_timestamp(Timestamp ts);

int utc_year(Timestamp ts);
int utc_hour(Timestamp ts);

}  // namespace ctbench
