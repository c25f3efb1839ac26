#include "phishscope/util/url.hpp"

#include <algorithm>
#include <cctype>

namespace phishscope::util {

int Url::effective_port() const {
  if (port > 0) return port;
  if (scheme == "https" || scheme == "wss") return 443;
  if (scheme == "http" || scheme == "ws") return 80;
  return -1;
}

std::string Url::origin() const {
  std::string out = scheme + "://" + host;
  if (port > 0) out += ":" + std::to_string(port);
  return out;
}

std::string Url::str() const { return origin() + path_query; }

std::optional<Url> parse_url(std::string_view text) {
  auto scheme_end = text.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) return std::nullopt;

  Url url;
  for (std::size_t i = 0; i < scheme_end; ++i) {
    char c = text[i];
    bool ok = (i == 0) ? std::isalpha(static_cast<unsigned char>(c))
                       : (std::isalnum(static_cast<unsigned char>(c)) ||
                          c == '+' || c == '-' || c == '.');
    if (!ok) return std::nullopt;
    url.scheme += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }

  std::string_view rest = text.substr(scheme_end + 3);
  auto path_start = rest.find_first_of("/?#");
  std::string_view authority =
      path_start == std::string_view::npos ? rest : rest.substr(0, path_start);
  if (authority.empty()) return std::nullopt;

  // Strip userinfo if present.
  if (auto at = authority.rfind('@'); at != std::string_view::npos)
    authority = authority.substr(at + 1);

  std::string_view host = authority;
  if (!authority.empty() && authority.front() == '[') {
    auto close = authority.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    host = authority.substr(0, close + 1);
    authority = authority.substr(close + 1);
    if (!authority.empty()) {
      if (authority.front() != ':') return std::nullopt;
      authority = authority.substr(1);
    } else {
      authority = {};
    }
  } else if (auto colon = authority.find(':'); colon != std::string_view::npos) {
    host = authority.substr(0, colon);
    authority = authority.substr(colon + 1);
  } else {
    authority = {};
  }

  if (host.empty()) return std::nullopt;
  url.host.assign(host);
  std::transform(url.host.begin(), url.host.end(), url.host.begin(),
                 [](unsigned char c) { return std::tolower(c); });

  if (!authority.empty()) {
    int port = 0;
    for (char c : authority) {
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
      port = port * 10 + (c - '0');
      if (port > 65535) return std::nullopt;
    }
    if (port == 0) return std::nullopt;
    url.port = port;
  }

  if (path_start == std::string_view::npos) {
    url.path_query = "/";
  } else {
    std::string_view tail = rest.substr(path_start);
    if (auto frag = tail.find('#'); frag != std::string_view::npos)
      tail = tail.substr(0, frag);
    url.path_query = tail.empty() ? "/" : std::string(tail);
    if (url.path_query.front() == '?') url.path_query = "/" + url.path_query;
  }
  return url;
}

bool is_absolute_url(std::string_view text) { return parse_url(text).has_value(); }

std::string resolve_redirect(const Url& base, std::string_view location) {
  if (is_absolute_url(location)) return std::string(location);
  if (!location.empty() && location.front() == '/')
    return base.origin() + std::string(location);
  // Path-relative: replace the last segment.
  std::string path = base.path_query;
  if (auto q = path.find('?'); q != std::string::npos) path = path.substr(0, q);
  auto slash = path.rfind('/');
  path = path.substr(0, slash + 1);
  return base.origin() + path + std::string(location);
}

}  // namespace phishscope::util
