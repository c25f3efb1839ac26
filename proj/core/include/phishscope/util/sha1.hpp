#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace phishscope::util {

std::array<std::uint8_t, 20> sha1(std::string_view data);
std::string sha1_hex(std::string_view data);

// FNV-1a, used for short deterministic content keys (mock fixtures, ids).
std::uint64_t fnv1a64(std::string_view data);
std::string fnv1a64_hex(std::string_view data);

}  // namespace phishscope::util
