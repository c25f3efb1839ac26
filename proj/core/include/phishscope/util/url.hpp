#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace phishscope::util {

// Just enough URL handling for validation, redirect resolution, and endpoint
// splitting. Not a general-purpose parser.
struct Url {
  std::string scheme;      // lowercase
  std::string host;
  int port = -1;           // -1 = scheme default
  std::string path_query;  // always starts with '/', may include ?query

  int effective_port() const;
  std::string origin() const;  // scheme://host[:port]
  std::string str() const;
};

std::optional<Url> parse_url(std::string_view text);
bool is_absolute_url(std::string_view text);

// Resolves `location` (absolute, host-relative, or path-relative) against
// `base`, as needed for Location redirect headers.
std::string resolve_redirect(const Url& base, std::string_view location);

}  // namespace phishscope::util
