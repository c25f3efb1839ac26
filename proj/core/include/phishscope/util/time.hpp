#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace phishscope::util {

// Timestamps are stored as RFC 3339 UTC at second precision
// ("2023-04-01T12:00:00Z"); equality comparisons happen on the formatted form.
std::string format_rfc3339(std::chrono::system_clock::time_point tp);
std::optional<std::chrono::system_clock::time_point> parse_rfc3339(
    std::string_view text);

}  // namespace phishscope::util
