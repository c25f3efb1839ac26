#include "cdp.hpp"

#include "phishscope/error.hpp"

namespace phishscope::cdp {

using nlohmann::json;

Session::Session(std::unique_ptr<ws::Connection> conn, std::string context)
    : conn_(std::move(conn)), context_(std::move(context)) {}

json Session::read_message(std::chrono::steady_clock::time_point deadline) {
  std::string raw;
  switch (conn_->recv_text(raw, deadline)) {
    case ws::RecvOutcome::message:
      break;
    case ws::RecvOutcome::timed_out:
      return json();  // null signals timeout to callers
    case ws::RecvOutcome::closed:
      throw Error(Errc::protocol_error, "browser closed the debugging socket",
                  context_);
    case ws::RecvOutcome::failed:
      throw Error(Errc::protocol_error, "debugging socket read failed", context_);
  }
  json msg = json::parse(raw, nullptr, false);
  if (msg.is_discarded() || !msg.is_object())
    throw Error(Errc::protocol_error,
                "unparseable message on the debugging socket", context_);
  return msg;
}

json Session::call(const std::string& method, json params,
                   std::chrono::milliseconds timeout) {
  const int id = next_id_++;
  json request;
  request["id"] = id;
  request["method"] = method;
  request["params"] = std::move(params);
  if (!conn_->send_text(request.dump()))
    throw Error(Errc::protocol_error, "failed to send " + method, context_);

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    json msg = read_message(deadline);
    if (msg.is_null())
      throw Error(Errc::protocol_error,
                  "timed out waiting for " + method + " response", context_);
    if (msg.contains("method")) {
      pending_events_.push_back(std::move(msg));
      continue;
    }
    if (!msg.contains("id") || !msg["id"].is_number_integer())
      throw Error(Errc::protocol_error, "response without id", context_);
    if (msg["id"].get<int>() != id)
      throw Error(Errc::protocol_error, "response id mismatch", context_);
    if (msg.contains("error")) {
      std::string what = "command " + method + " failed";
      if (msg["error"].is_object() && msg["error"].contains("message") &&
          msg["error"]["message"].is_string())
        what += ": " + msg["error"]["message"].get<std::string>();
      throw Error(Errc::protocol_error, what, context_);
    }
    return msg.contains("result") ? msg["result"] : json::object();
  }
}

bool Session::wait_event(const std::string& method,
                         std::chrono::milliseconds timeout, json* params_out) {
  auto matches = [&](const json& msg) {
    return msg.contains("method") && msg["method"].is_string() &&
           msg["method"].get<std::string>() == method;
  };
  for (auto it = pending_events_.begin(); it != pending_events_.end(); ++it) {
    if (matches(*it)) {
      if (params_out && it->contains("params")) *params_out = (*it)["params"];
      pending_events_.erase(it);
      return true;
    }
  }
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    json msg = read_message(deadline);
    if (msg.is_null()) return false;
    if (matches(msg)) {
      if (params_out && msg.contains("params")) *params_out = msg["params"];
      return true;
    }
    if (msg.contains("method")) pending_events_.push_back(std::move(msg));
    // Stray responses (no method) are dropped; no call is outstanding here.
  }
}

void Session::close() { conn_->close(); }

}  // namespace phishscope::cdp
