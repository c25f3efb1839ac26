#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace phishscope::ws {

// Opcode subset used by the debugging wire protocol.
constexpr std::uint8_t kOpContinuation = 0x0;
constexpr std::uint8_t kOpText = 0x1;
constexpr std::uint8_t kOpBinary = 0x2;
constexpr std::uint8_t kOpClose = 0x8;
constexpr std::uint8_t kOpPing = 0x9;
constexpr std::uint8_t kOpPong = 0xA;

struct Frame {
  std::uint8_t opcode = 0;
  bool fin = true;
  std::string payload;
};

// Sec-WebSocket-Accept value for a client key (RFC 6455 §4.2.2).
std::string accept_token(std::string_view client_key);

std::string encode_frame(std::uint8_t opcode, std::string_view payload,
                         bool masked, std::uint32_t mask_key);

// Incremental frame decoder; tolerates both masked and unmasked input.
class FrameDecoder {
 public:
  void feed(std::string_view data) { buf_.append(data); }
  std::optional<Frame> next();
  bool bad() const { return bad_; }

 private:
  std::string buf_;
  bool bad_ = false;
};

// Thin RAII wrapper over a connected TCP socket with poll-based deadlines.
class TcpSocket {
 public:
  TcpSocket() = default;
  ~TcpSocket();
  TcpSocket(TcpSocket&& other) noexcept;
  TcpSocket& operator=(TcpSocket&& other) noexcept;
  TcpSocket(const TcpSocket&) = delete;
  TcpSocket& operator=(const TcpSocket&) = delete;

  static std::optional<TcpSocket> connect(const std::string& host, int port,
                                          std::chrono::milliseconds timeout);
  static TcpSocket adopt(int fd);

  bool valid() const { return fd_ >= 0; }
  int fd() const { return fd_; }
  bool send_all(std::string_view data);

  // >0 bytes read; 0 peer closed; -1 error; -2 deadline passed.
  int recv_some(char* buf, std::size_t len,
                std::chrono::steady_clock::time_point deadline);
  void close();

 private:
  int fd_ = -1;
};

enum class RecvOutcome { message, timed_out, closed, failed };

// A framed text connection after the handshake. Writes are serialized; reads
// must stay on one thread.
class Connection {
 public:
  // `preread` carries frame bytes that arrived together with the handshake.
  Connection(TcpSocket sock, bool client_side, std::string_view preread = {});

  bool send_text(std::string_view payload);
  RecvOutcome recv_text(std::string& out,
                        std::chrono::steady_clock::time_point deadline);
  void close();
  bool open() const { return !closed_ && sock_.valid(); }

 private:
  bool send_frame(std::uint8_t opcode, std::string_view payload);

  TcpSocket sock_;
  bool client_side_;
  bool closed_ = false;
  FrameDecoder decoder_;
  std::string fragments_;
  std::uint32_t mask_seed_;
  std::mutex write_mu_;
};

// Client-side connect + upgrade handshake. Null if the endpoint is
// unreachable or rejects the upgrade within the timeout. (Heap-allocated:
// the connection owns a mutex and cannot move.)
std::unique_ptr<Connection> connect_client(const std::string& host, int port,
                                           const std::string& path,
                                           std::chrono::milliseconds timeout);

// Reads up to and including the blank line that ends an HTTP head. Bytes
// received past it (a peer may start framing immediately) land in `leftover`.
std::optional<std::string> read_http_head(
    TcpSocket& sock, std::chrono::steady_clock::time_point deadline,
    std::string* leftover = nullptr);
std::optional<std::string> header_value(std::string_view http_head,
                                        std::string_view name);
std::string make_upgrade_response(std::string_view client_key);

}  // namespace phishscope::ws
