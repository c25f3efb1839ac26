#include <doctest.h>

#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "phishscope/llm_client.hpp"
#include "phishscope/util/sha1.hpp"
#include "support/loopback.hpp"
#include "support/temp_dir.hpp"

using namespace phishscope;
using namespace std::chrono_literals;

namespace {

BackendConfig fast_config() {
  BackendConfig config;
  config.model_name = "test-model";
  config.max_retries = 3;
  config.retry_backoff = {1ms};
  config.request_timeout = 5s;
  return config;
}

void write_fixture(const std::string& dir, const std::string& prompt,
                   const std::string& body) {
  std::ofstream out(dir + "/" + util::fnv1a64_hex(prompt) + ".txt",
                    std::ios::binary);
  out << body;
}

// Minimal chat-completions stub with a per-test handler.
struct ChatStub {
  using Handler =
      std::function<void(int request_no, const httplib::Request&, httplib::Response&)>;

  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> requests{0};
  std::mutex mu;
  std::string last_authorization;

  explicit ChatStub(Handler handler) {
    server.Post("/v1/chat/completions",
                [this, handler](const httplib::Request& req, httplib::Response& res) {
                  int n = ++requests;
                  {
                    std::lock_guard<std::mutex> lock(mu);
                    last_authorization = req.get_header_value("Authorization");
                  }
                  handler(n, req, res);
                });
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }

  ~ChatStub() {
    server.stop();
    thread.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

void reply_with_text(httplib::Response& res, const std::string& text) {
  nlohmann::json body = {
      {"choices",
       {{{"message", {{"role", "assistant"}, {"content", text}}},
         {"finish_reason", "stop"}}}}};
  res.set_content(body.dump(), "application/json");
}

}  // namespace

TEST_CASE("mock transport replays fixture bodies verbatim") {
  testsupport::TempDir dir;
  write_fixture(dir.path(), "what about this page?", "verbatim answer\n");

  MockTransport transport(dir.path());
  BackendConfig config = fast_config();
  RawResponse r = complete_with(transport, "what about this page?", config);
  CHECK(r.text == "verbatim answer\n");
  CHECK(r.attempt == 1);
  CHECK(r.model_name == "test-model");
  CHECK(transport.total_requests() == 1);
}

TEST_CASE("scripted transient failures are retried then succeed") {
  testsupport::TempDir dir;
  write_fixture(dir.path(), "p",
                R"({"fail_status": 429, "fail_times": 2, "text": "third time lucky"})");

  MockTransport transport(dir.path());
  RawResponse r = complete_with(transport, "p", fast_config());
  CHECK(r.text == "third time lucky");
  CHECK(r.attempt == 3);
  CHECK(transport.total_requests() == 3);
}

TEST_CASE("a permanent server failure consumes exactly max_retries + 1 requests") {
  testsupport::TempDir dir;
  write_fixture(dir.path(), "p", R"({"fail_status": 500})");

  MockTransport transport(dir.path());
  BackendConfig config = fast_config();
  config.max_retries = 3;
  try {
    complete_with(transport, "p", config);
    FAIL("permanent failure did not throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::server_error);
  }
  CHECK(transport.total_requests() == 4);
}

TEST_CASE("non-retriable scripted failures stop after one request") {
  testsupport::TempDir dir;
  write_fixture(dir.path(), "auth", R"({"fail_status": 401})");
  write_fixture(dir.path(), "filter", R"({"fail_status": 600})");

  MockTransport transport(dir.path());
  try {
    complete_with(transport, "auth", fast_config());
    FAIL("auth failure did not throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::auth_error);
  }
  CHECK(transport.total_requests() == 1);

  try {
    complete_with(transport, "filter", fast_config());
    FAIL("content filter did not throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::content_filtered);
  }
  CHECK(transport.total_requests() == 2);
}

TEST_CASE("a missing fixture names the file it wanted") {
  testsupport::TempDir dir;
  MockTransport transport(dir.path());
  try {
    complete_with(transport, "unscripted prompt", fast_config());
    FAIL("missing fixture did not throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::missing_fixture);
    CHECK(std::string(e.what()).find(
              util::fnv1a64_hex("unscripted prompt") + ".txt") !=
          std::string::npos);
  }
  CHECK(transport.total_requests() == 1);
}

TEST_CASE("scripted success without a text key yields an empty body") {
  testsupport::TempDir dir;
  write_fixture(dir.path(), "p", R"({"fail_status": 503, "fail_times": 1})");
  MockTransport transport(dir.path());
  RawResponse r = complete_with(transport, "p", fast_config());
  CHECK(r.text.empty());
  CHECK(r.attempt == 2);
}

TEST_CASE("transport selection and endpoint validation") {
  BackendConfig config = fast_config();
  CHECK_THROWS_AS(make_transport(config), Error);  // nothing configured

  config.mock_fixtures_dir = "/tmp";
  CHECK(make_transport(config)->name() == "mock");

  config.mock_fixtures_dir.clear();
  config.endpoint = "https://api.example.com/v1/chat/completions";
  CHECK_THROWS_AS(make_transport(config), Error);  // only plain http here

  config.endpoint = "not a url";
  CHECK_THROWS_AS(make_transport(config), Error);

  config.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  CHECK(make_transport(config)->name() == "http:127.0.0.1");
}

TEST_CASE("http transport completes a request and carries the bearer token") {
  ChatStub stub([](int, const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body);
    CHECK(body["model"] == "test-model");
    CHECK(body["messages"][0]["content"] == "the prompt");
    CHECK(body["temperature"] == 0.0);
    reply_with_text(res, "an answer");
  });

  BackendConfig config = fast_config();
  config.endpoint = stub.endpoint();
  config.api_key = "sk-test-secret";
  config.temperature = 0.0;

  RawResponse r = complete(PromptBundle{.text = "the prompt"}, config);
  CHECK(r.text == "an answer");
  CHECK(stub.requests == 1);
  std::lock_guard<std::mutex> lock(stub.mu);
  CHECK(stub.last_authorization == "Bearer sk-test-secret");
}

TEST_CASE("http transport retries rate limits and reports the final attempt") {
  ChatStub stub([](int n, const httplib::Request&, httplib::Response& res) {
    if (n <= 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    reply_with_text(res, "eventually");
  });

  BackendConfig config = fast_config();
  config.endpoint = stub.endpoint();
  RawResponse r = complete(PromptBundle{.text = "p"}, config);
  CHECK(r.text == "eventually");
  CHECK(r.attempt == 3);
  CHECK(stub.requests == 3);
}

TEST_CASE("http auth failures do not retry and never leak the key") {
  ChatStub stub([](int, const httplib::Request&, httplib::Response& res) {
    res.status = 401;
    res.set_content("{\"error\": \"bad key\"}", "application/json");
  });

  BackendConfig config = fast_config();
  config.endpoint = stub.endpoint();
  config.api_key = "sk-super-secret-123";
  try {
    complete(PromptBundle{.text = "p"}, config);
    FAIL("401 did not throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::auth_error);
    CHECK(std::string(e.what()).find("sk-super-secret-123") ==
          std::string::npos);
    CHECK(e.detail().find("sk-super-secret-123") == std::string::npos);
  }
  CHECK(stub.requests == 1);
}

TEST_CASE("http content filter responses map to content_filtered") {
  SUBCASE("explicit 400 with a content_filter body") {
    ChatStub stub([](int, const httplib::Request&, httplib::Response& res) {
      res.status = 400;
      res.set_content(R"({"error": {"code": "content_filter"}})",
                      "application/json");
    });
    BackendConfig config = fast_config();
    config.endpoint = stub.endpoint();
    try {
      complete(PromptBundle{.text = "p"}, config);
      FAIL("content filter did not throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::content_filtered);
    }
    CHECK(stub.requests == 1);
  }
  SUBCASE("finish_reason content_filter on a 200") {
    ChatStub stub([](int, const httplib::Request&, httplib::Response& res) {
      nlohmann::json body = {
          {"choices",
           {{{"message", {{"content", "partial"}}},
             {"finish_reason", "content_filter"}}}}};
      res.set_content(body.dump(), "application/json");
    });
    BackendConfig config = fast_config();
    config.endpoint = stub.endpoint();
    CHECK_THROWS_AS(complete(PromptBundle{.text = "p"}, config), Error);
    CHECK(stub.requests == 1);
  }
}

TEST_CASE("malformed backend replies surface as protocol errors") {
  ChatStub stub([](int n, const httplib::Request&, httplib::Response& res) {
    if (n == 1) res.set_content("this is not json", "text/plain");
    else res.set_content(R"({"choices": []})", "application/json");
  });

  BackendConfig config = fast_config();
  config.endpoint = stub.endpoint();
  for (int round = 0; round < 2; ++round) {
    try {
      complete(PromptBundle{.text = "p"}, config);
      FAIL("malformed reply did not throw");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::protocol_error);
    }
  }
  CHECK(stub.requests == 2);  // protocol errors are not retried
}

TEST_CASE("an unexpected status is reported without retry") {
  ChatStub stub([](int, const httplib::Request&, httplib::Response& res) {
    res.status = 404;
    res.set_content("gone", "text/plain");
  });
  BackendConfig config = fast_config();
  config.endpoint = stub.endpoint();
  try {
    complete(PromptBundle{.text = "p"}, config);
    FAIL("404 did not throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::server_error);
    CHECK(std::string(e.what()).find("404") != std::string::npos);
  }
  CHECK(stub.requests == 1);
}

TEST_CASE("an unreachable endpoint exhausts retries with transport failures") {
  int dead_port;
  {
    testsupport::Listener probe;  // grab a free port, then release it
    dead_port = probe.port();
  }
  BackendConfig config = fast_config();
  config.endpoint = "http://127.0.0.1:" + std::to_string(dead_port) + "/v1";
  config.max_retries = 1;
  config.request_timeout = 1s;
  try {
    complete(PromptBundle{.text = "p"}, config);
    FAIL("dead endpoint did not throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::server_error);
  }
}
