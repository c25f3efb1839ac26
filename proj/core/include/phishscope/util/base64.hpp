#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phishscope::util {

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(std::string_view data);

// Rejects non-alphabet characters and bad padding.
std::optional<std::vector<std::uint8_t>> base64_decode(std::string_view text);

}  // namespace phishscope::util
