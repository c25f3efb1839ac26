#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "phishscope/snapshot.hpp"

namespace phishscope {

struct CrawlConfig {
  std::string debug_endpoint = "http://127.0.0.1:9222";
  std::chrono::milliseconds navigation_timeout = std::chrono::seconds(30);
  std::chrono::milliseconds settle_delay = std::chrono::seconds(3);
  std::chrono::milliseconds connect_timeout = std::chrono::seconds(5);
  ProfileName profile = ProfileName::desktop_chrome;
  // Screenshot file directory; empty captures but discards the image (a
  // warning is recorded on the snapshot instead).
  std::string screenshot_dir;
};

// Exactly the two built-in environments; user agents and viewports mirror
// the defaults shipped in configs/default.json.
std::vector<DeviceProfile> builtin_profiles();
DeviceProfile profile_by_name(ProfileName name);

// Opens a fresh page target on the externally running browser, overrides
// user agent and device metrics per profile, navigates, waits for the load
// event plus settle_delay, then reads document.URL and the root element's
// outer markup and captures a screenshot. The target is always closed, also
// on failure. ocr_lines stay empty (OCR is a separate stage).
// Errors: browser_unreachable, navigation_timeout, protocol_error — each
// carries the requested url in detail().
PageSnapshot capture(const std::string& url, const CrawlConfig& config);

}  // namespace phishscope
