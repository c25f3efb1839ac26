#pragma once

#include <stdexcept>
#include <string>

namespace phishscope {

// Every failure the pipeline can surface, one code per contract-level error.
enum class Errc {
  // snapshot / manifest
  not_found,
  malformed_snapshot,
  duplicate_id,
  io_error,
  malformed_manifest,
  dangling_path,
  // html
  unparseable_markup,
  // crawler
  browser_unreachable,
  navigation_timeout,
  protocol_error,
  // llm backend
  auth_error,
  rate_limited,
  server_error,
  content_filtered,
  missing_fixture,
  // ocr service
  service_unreachable,
  unsupported_image,
  quota_exceeded,
  // eval
  degenerate_class_balance,
  missing_verdict,
  // config / cli
  invalid_config,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::string detail = {});

  Errc code() const noexcept { return code_; }

  // Machine-checkable context: the offending field, id, or URL.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace phishscope
