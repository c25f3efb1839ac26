#pragma once

// Minimal remote-debugging protocol session: request/response by id over a
// websocket, with unsolicited events queued for later waits. Internal to the
// crawler and its tests.

#include <chrono>
#include <deque>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "phishscope/util/ws.hpp"

namespace phishscope::cdp {

class Session {
 public:
  // context tags thrown errors' detail() (the requested page url).
  Session(std::unique_ptr<ws::Connection> conn, std::string context);

  // Sends {id, method, params} and waits for the matching response's
  // "result". Protocol faults and command timeouts throw protocol_error.
  nlohmann::json call(const std::string& method, nlohmann::json params,
                      std::chrono::milliseconds timeout);

  // True when the event arrives within the timeout; false on timeout.
  // Other events are consumed into the queue; protocol faults throw.
  bool wait_event(const std::string& method, std::chrono::milliseconds timeout,
                  nlohmann::json* params_out = nullptr);

  void close();

 private:
  nlohmann::json read_message(std::chrono::steady_clock::time_point deadline);

  std::unique_ptr<ws::Connection> conn_;
  std::string context_;
  int next_id_ = 1;
  std::deque<nlohmann::json> pending_events_;
};

}  // namespace phishscope::cdp
