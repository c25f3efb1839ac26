#include "phishscope/llm_client.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "phishscope/util/sha1.hpp"
#include "phishscope/util/url.hpp"

namespace phishscope {

namespace {

using nlohmann::json;

class HttpTransport final : public Transport {
 public:
  explicit HttpTransport(const BackendConfig& config) : config_(config) {
    auto url = util::parse_url(config.endpoint);
    if (!url)
      throw Error(Errc::invalid_config, "backend endpoint is not a valid URL",
                  config.endpoint);
    if (url->scheme != "http")
      throw Error(Errc::invalid_config,
                  "backend endpoint scheme not supported (use http or the "
                  "mock backend)",
                  url->scheme);
    host_ = url->host;
    port_ = url->effective_port();
    path_ = url->path_query;
  }

  Attempt try_once(const std::string& prompt) override {
    json body;
    body["model"] = config_.model_name;
    body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
    if (config_.temperature) body["temperature"] = *config_.temperature;
    if (config_.top_p) body["top_p"] = *config_.top_p;

    httplib::Client client(host_, port_);
    const auto timeout = config_.request_timeout;
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                  (timeout % std::chrono::seconds(1)).count() * 1000);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                            (timeout % std::chrono::seconds(1)).count() * 1000);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
      headers.emplace("api-key", config_.api_key);
    }

    auto res = client.Post(path_, headers, body.dump(), "application/json");
    Attempt a;
    if (!res) {
      a.error = Errc::server_error;
      a.message = "backend request failed: " + httplib::to_string(res.error());
      a.retriable = true;
      return a;
    }
    if (res->status == 401 || res->status == 403) {
      a.error = Errc::auth_error;
      a.message = "backend rejected credentials (HTTP " +
                  std::to_string(res->status) + ")";
      a.retriable = false;
      return a;
    }
    if (res->status == 429) {
      a.error = Errc::rate_limited;
      a.message = "backend rate limited the request (HTTP 429)";
      a.retriable = true;
      return a;
    }
    if (res->status >= 500) {
      a.error = Errc::server_error;
      a.message = "backend server error (HTTP " + std::to_string(res->status) + ")";
      a.retriable = true;
      return a;
    }
    json doc = json::parse(res->body, nullptr, false);
    if (res->status == 400 && !doc.is_discarded() &&
        doc.dump().find("content_filter") != std::string::npos) {
      a.error = Errc::content_filtered;
      a.message = "backend content filter refused the prompt";
      a.retriable = false;
      return a;
    }
    if (res->status != 200) {
      a.error = Errc::server_error;
      a.message = "unexpected backend status " + std::to_string(res->status);
      a.retriable = false;
      return a;
    }
    if (doc.is_discarded() || !doc.contains("choices") ||
        !doc["choices"].is_array() || doc["choices"].empty()) {
      a.error = Errc::protocol_error;
      a.message = "backend response missing choices";
      a.retriable = false;
      return a;
    }
    const json& choice = doc["choices"][0];
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string() &&
        choice["finish_reason"].get<std::string>() == "content_filter") {
      a.error = Errc::content_filtered;
      a.message = "backend content filter truncated the response";
      a.retriable = false;
      return a;
    }
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string()) {
      a.error = Errc::protocol_error;
      a.message = "backend response missing message content";
      a.retriable = false;
      return a;
    }
    a.ok = true;
    a.text = choice["message"]["content"].get<std::string>();
    return a;
  }

  std::string name() const override { return "http:" + host_; }

 private:
  BackendConfig config_;
  std::string host_;
  int port_ = 80;
  std::string path_;
};

std::chrono::milliseconds backoff_for(const BackendConfig& config, int retry_index) {
  if (config.retry_backoff.empty()) return std::chrono::milliseconds(0);
  const std::size_t i = std::min<std::size_t>(
      static_cast<std::size_t>(retry_index), config.retry_backoff.size() - 1);
  return config.retry_backoff[i];
}

}  // namespace

MockTransport::MockTransport(std::string fixtures_dir)
    : dir_(std::move(fixtures_dir)) {}

Transport::Attempt MockTransport::try_once(const std::string& prompt) {
  const std::string key = util::fnv1a64_hex(prompt);
  const std::string path = dir_ + "/" + key + ".txt";

  Attempt a;
  std::ifstream in(path, std::ios::binary);
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++total_requests_;
  }
  if (!in) {
    a.error = Errc::missing_fixture;
    a.message = "no mock fixture for this prompt (expected " + key + ".txt)";
    a.retriable = false;
    return a;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string body = buf.str();

  json directive = json::parse(body, nullptr, false);
  if (!directive.is_discarded() && directive.is_object() &&
      directive.contains("fail_status")) {
    const int status = directive["fail_status"].get<int>();
    bool fail_now = true;
    if (directive.contains("fail_times")) {
      std::lock_guard<std::mutex> lock(mu_);
      int& served = failures_served_[key];
      if (served >= directive["fail_times"].get<int>())
        fail_now = false;
      else
        ++served;
    }
    if (fail_now) {
      if (status == 401 || status == 403) {
        a.error = Errc::auth_error;
        a.retriable = false;
      } else if (status == 429) {
        a.error = Errc::rate_limited;
        a.retriable = true;
      } else if (status == 600) {  // scripted content filter
        a.error = Errc::content_filtered;
        a.retriable = false;
      } else {
        a.error = Errc::server_error;
        a.retriable = true;
      }
      a.message = "mock scripted failure (status " + std::to_string(status) + ")";
      return a;
    }
    a.ok = true;
    a.text = directive.contains("text") && directive["text"].is_string()
                 ? directive["text"].get<std::string>()
                 : "";
    return a;
  }

  a.ok = true;
  a.text = std::move(body);
  return a;
}

int MockTransport::total_requests() const {
  std::lock_guard<std::mutex> lock(mu_);
  return total_requests_;
}

std::unique_ptr<Transport> make_transport(const BackendConfig& config) {
  if (!config.mock_fixtures_dir.empty())
    return std::make_unique<MockTransport>(config.mock_fixtures_dir);
  if (config.endpoint.empty())
    throw Error(Errc::invalid_config,
                "no backend configured: set an endpoint or a mock fixtures dir");
  return std::make_unique<HttpTransport>(config);
}

RawResponse complete_with(Transport& transport, const std::string& prompt,
                          const BackendConfig& config) {
  const int max_attempts = config.max_retries + 1;
  Transport::Attempt last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    const auto start = std::chrono::steady_clock::now();
    last = transport.try_once(prompt);
    if (last.ok) {
      RawResponse r;
      r.text = std::move(last.text);
      r.model_name = config.model_name;
      r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      r.attempt = attempt;
      return r;
    }
    if (!last.retriable || attempt == max_attempts) break;
    std::this_thread::sleep_for(backoff_for(config, attempt - 1));
  }
  throw Error(last.error, last.message, transport.name());
}

RawResponse complete(const PromptBundle& prompt, const BackendConfig& config) {
  auto transport = make_transport(config);
  return complete_with(*transport, prompt.text, config);
}

}  // namespace phishscope
