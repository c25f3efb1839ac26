#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "phishscope/error.hpp"
#include "phishscope/prompt.hpp"

namespace phishscope {

struct BackendConfig {
  std::string endpoint;    // chat-completions URL (http)
  std::string model_name;
  std::string api_key;     // sourced from the environment; never logged
  std::optional<double> temperature;  // absent = provider default
  std::optional<double> top_p;        // absent = provider default
  int max_retries = 3;
  std::vector<std::chrono::milliseconds> retry_backoff = {
      std::chrono::milliseconds(100), std::chrono::milliseconds(200),
      std::chrono::milliseconds(400)};  // last entry repeats
  std::chrono::milliseconds request_timeout = std::chrono::seconds(60);
  int concurrency = 4;  // parallel-call cap, enforced by the evaluate loop
  std::string mock_fixtures_dir;  // non-empty selects the mock backend
};

struct RawResponse {
  std::string text;  // verbatim message text, no trimming
  std::string model_name;
  std::chrono::milliseconds latency{0};
  int attempt = 1;  // which try succeeded (1-based)
};

// One wire attempt. Outcomes map onto Errc: rate_limited and server_error
// (and transport-level failures folded into server_error) are retriable;
// auth_error and content_filtered are not.
class Transport {
 public:
  virtual ~Transport() = default;

  struct Attempt {
    bool ok = false;
    std::string text;
    Errc error = Errc::server_error;
    std::string message;
    bool retriable = false;
  };

  virtual Attempt try_once(const std::string& prompt) = 0;
  virtual std::string name() const = 0;
};

// Deterministic fixture-backed backend: the response for a prompt lives at
// <dir>/<fnv1a64_hex(prompt)>.txt. A fixture whose body is a JSON object
// with a "fail_status" key scripts failures:
//   {"fail_status": 429, "fail_times": 2, "text": "..."}  fail twice, then
//   succeed with text; omit "fail_times" for a permanent failure.
// Missing fixture files raise missing_fixture naming the expected file.
class MockTransport final : public Transport {
 public:
  explicit MockTransport(std::string fixtures_dir);

  Attempt try_once(const std::string& prompt) override;
  std::string name() const override { return "mock"; }

  int total_requests() const;

 private:
  std::string dir_;
  mutable std::mutex mu_;
  int total_requests_ = 0;
  std::map<std::string, int> failures_served_;  // fixture hash -> count
};

// HTTP transport for config.endpoint, mock transport when
// config.mock_fixtures_dir is set. Errors: invalid_config.
std::unique_ptr<Transport> make_transport(const BackendConfig& config);

// Retry loop over a transport: up to max_retries + 1 total attempts,
// sleeping per the backoff schedule between retriable failures.
// Errors: auth_error / content_filtered immediately; rate_limited /
// server_error / missing_fixture after exhausting retries.
RawResponse complete_with(Transport& transport, const std::string& prompt,
                          const BackendConfig& config);

// Convenience: build the transport from config and run the loop. The bytes
// sent are exactly prompt.text.
RawResponse complete(const PromptBundle& prompt, const BackendConfig& config);

}  // namespace phishscope
