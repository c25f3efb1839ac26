#include "phishscope/error.hpp"

namespace phishscope {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::not_found: return "NotFound";
    case Errc::malformed_snapshot: return "MalformedSnapshot";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::io_error: return "IoError";
    case Errc::malformed_manifest: return "MalformedManifest";
    case Errc::dangling_path: return "DanglingPath";
    case Errc::unparseable_markup: return "UnparseableMarkup";
    case Errc::browser_unreachable: return "BrowserUnreachable";
    case Errc::navigation_timeout: return "NavigationTimeout";
    case Errc::protocol_error: return "ProtocolError";
    case Errc::auth_error: return "AuthError";
    case Errc::rate_limited: return "RateLimited";
    case Errc::server_error: return "ServerError";
    case Errc::content_filtered: return "ContentFiltered";
    case Errc::missing_fixture: return "MissingFixture";
    case Errc::service_unreachable: return "ServiceUnreachable";
    case Errc::unsupported_image: return "UnsupportedImage";
    case Errc::quota_exceeded: return "QuotaExceeded";
    case Errc::degenerate_class_balance: return "DegenerateClassBalance";
    case Errc::missing_verdict: return "MissingVerdict";
    case Errc::invalid_config: return "InvalidConfig";
  }
  return "UnknownError";
}

Error::Error(Errc code, const std::string& message, std::string detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace phishscope
