#include "phishscope/crawler.hpp"

#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "cdp.hpp"
#include "phishscope/error.hpp"
#include "phishscope/util/base64.hpp"
#include "phishscope/util/sha1.hpp"
#include "phishscope/util/time.hpp"
#include "phishscope/util/url.hpp"
#include "phishscope/util/ws.hpp"

namespace phishscope {

namespace {

using nlohmann::json;

constexpr char kDesktopUserAgent[] =
    "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 "
    "(KHTML, like Gecko) Chrome/113.0.0.0 Safari/537.36";
constexpr char kMobileUserAgent[] =
    "Mozilla/5.0 (iPhone; CPU iPhone OS 16_5 like Mac OS X) "
    "AppleWebKit/605.1.15 (KHTML, like Gecko) Version/16.5 Mobile/15E148 "
    "Safari/604.1";

struct Discovery {
  std::string target_id;
  std::string ws_host;
  int ws_port = 0;
  std::string ws_path;
};

Discovery discover_target(const CrawlConfig& config, const std::string& page_url) {
  auto endpoint = util::parse_url(config.debug_endpoint);
  if (!endpoint || endpoint->scheme != "http")
    throw Error(Errc::invalid_config,
                "debug_endpoint must be an http URL: " + config.debug_endpoint,
                page_url);

  httplib::Client client(endpoint->host, endpoint->effective_port());
  const auto connect_s = std::chrono::duration_cast<std::chrono::seconds>(
      config.connect_timeout);
  const auto connect_rem_us =
      (config.connect_timeout % std::chrono::seconds(1)).count() * 1000;
  client.set_connection_timeout(connect_s.count(), connect_rem_us);
  client.set_read_timeout(connect_s.count() + 1, connect_rem_us);

  // Newer browsers require PUT for target creation; older ones accept GET.
  auto res = client.Put("/json/new?about:blank");
  if (!res || res->status >= 400) {
    auto res_get = client.Get("/json/new?about:blank");
    if (res_get && res_get->status < 400) res = std::move(res_get);
  }
  if (!res)
    throw Error(Errc::browser_unreachable,
                "cannot reach browser debug endpoint " + config.debug_endpoint,
                page_url);
  if (res->status >= 400)
    throw Error(Errc::browser_unreachable,
                "debug endpoint refused target creation (HTTP " +
                    std::to_string(res->status) + ")",
                page_url);

  json doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() ||
      !doc.contains("webSocketDebuggerUrl") ||
      !doc["webSocketDebuggerUrl"].is_string())
    throw Error(Errc::protocol_error,
                "target description lacks webSocketDebuggerUrl", page_url);

  Discovery d;
  if (doc.contains("id") && doc["id"].is_string())
    d.target_id = doc["id"].get<std::string>();

  auto ws_url = util::parse_url(doc["webSocketDebuggerUrl"].get<std::string>());
  if (!ws_url)
    throw Error(Errc::protocol_error, "unparseable webSocketDebuggerUrl",
                page_url);
  d.ws_host = ws_url->host;
  d.ws_port = ws_url->port > 0 ? ws_url->port : 80;
  d.ws_path = ws_url->path_query;
  return d;
}

void close_target(const CrawlConfig& config, const std::string& target_id) {
  if (target_id.empty()) return;
  auto endpoint = util::parse_url(config.debug_endpoint);
  if (!endpoint) return;
  httplib::Client client(endpoint->host, endpoint->effective_port());
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);
  client.Get(("/json/close/" + target_id).c_str());  // best effort
}

std::string evaluate_string(cdp::Session& session, const std::string& expression,
                            std::chrono::milliseconds timeout,
                            const std::string& page_url) {
  json result = session.call(
      "Runtime.evaluate",
      {{"expression", expression}, {"returnByValue", true}}, timeout);
  if (!result.contains("result") || !result["result"].is_object() ||
      !result["result"].contains("value") ||
      !result["result"]["value"].is_string())
    throw Error(Errc::protocol_error,
                "script evaluation returned no string value", page_url);
  return result["result"]["value"].get<std::string>();
}

}  // namespace

std::vector<DeviceProfile> builtin_profiles() {
  return {
      {ProfileName::desktop_chrome, kDesktopUserAgent, 1280, 800},
      {ProfileName::mobile_safari, kMobileUserAgent, 390, 844},
  };
}

DeviceProfile profile_by_name(ProfileName name) {
  for (const auto& p : builtin_profiles())
    if (p.name == name) return p;
  return builtin_profiles().front();
}

PageSnapshot capture(const std::string& url, const CrawlConfig& config) {
  if (!util::parse_url(url))
    throw Error(Errc::invalid_config, "capture url is not absolute", url);

  const DeviceProfile profile = profile_by_name(config.profile);
  Discovery target = discover_target(config, url);

  auto conn = ws::connect_client(target.ws_host, target.ws_port, target.ws_path,
                                 config.connect_timeout);
  if (!conn) {
    close_target(config, target.target_id);
    throw Error(Errc::browser_unreachable,
                "websocket upgrade to browser target failed", url);
  }

  cdp::Session session(std::move(conn), url);
  const auto cmd_timeout = config.navigation_timeout;
  PageSnapshot snapshot;

  try {
    session.call("Emulation.setUserAgentOverride",
                 {{"userAgent", profile.user_agent}}, cmd_timeout);
    session.call("Emulation.setDeviceMetricsOverride",
                 {{"width", profile.viewport_width},
                  {"height", profile.viewport_height},
                  {"deviceScaleFactor", 1},
                  {"mobile", profile.name == ProfileName::mobile_safari}},
                 cmd_timeout);
    session.call("Page.enable", json::object(), cmd_timeout);
    session.call("Page.navigate", {{"url", url}}, config.navigation_timeout);

    if (!session.wait_event("Page.loadEventFired", config.navigation_timeout)) {
      throw Error(Errc::navigation_timeout,
                  "load event did not fire within the navigation timeout", url);
    }
    std::this_thread::sleep_for(config.settle_delay);

    snapshot.final_url =
        evaluate_string(session, "document.URL", cmd_timeout, url);
    snapshot.html = evaluate_string(
        session, "document.documentElement.outerHTML", cmd_timeout, url);

    json shot = session.call("Page.captureScreenshot", {{"format", "png"}},
                             cmd_timeout);
    snapshot.id = "cap-" + util::fnv1a64_hex(
                               url + "|" + std::string(profile_name_str(
                                               profile.name)));
    if (shot.contains("data") && shot["data"].is_string()) {
      auto bytes = util::base64_decode(shot["data"].get<std::string>());
      if (bytes && !config.screenshot_dir.empty()) {
        const std::string name = snapshot.id + ".png";
        const std::string path = config.screenshot_dir + "/" + name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes->data()),
                  static_cast<std::streamsize>(bytes->size()));
        if (out) snapshot.screenshot_ref = name;
      } else if (bytes) {
        snapshot.warnings.push_back("screenshot discarded: no screenshot_dir");
      }
    }
  } catch (...) {
    session.close();
    close_target(config, target.target_id);
    throw;
  }

  session.close();
  close_target(config, target.target_id);

  auto final_parsed = util::parse_url(snapshot.final_url);
  if (!final_parsed ||
      (final_parsed->scheme != "http" && final_parsed->scheme != "https"))
    throw Error(Errc::protocol_error,
                "browser reported a non-http final url: " + snapshot.final_url,
                url);

  snapshot.requested_url = url;
  snapshot.profile = profile.name;
  snapshot.fetched_at = std::chrono::system_clock::now();
  snapshot.capture_error = snapshot.html.empty();
  return snapshot;
}

}  // namespace phishscope
