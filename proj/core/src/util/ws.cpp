#include "phishscope/util/ws.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <random>

#include "phishscope/util/base64.hpp"
#include "phishscope/util/sha1.hpp"

namespace phishscope::ws {

namespace {

constexpr char kGuid[] = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::uint32_t random_u32() {
  static thread_local std::mt19937 rng{std::random_device{}()};
  return rng();
}

int poll_fd(int fd, short events, std::chrono::steady_clock::time_point deadline) {
  auto now = std::chrono::steady_clock::now();
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
  if (left.count() < 0) left = std::chrono::milliseconds(0);
  pollfd p{};
  p.fd = fd;
  p.events = events;
  return ::poll(&p, 1, static_cast<int>(left.count()));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::string accept_token(std::string_view client_key) {
  std::string joined(client_key);
  joined += kGuid;
  auto digest = util::sha1(joined);
  return util::base64_encode(digest.data(), digest.size());
}

std::string encode_frame(std::uint8_t opcode, std::string_view payload,
                         bool masked, std::uint32_t mask_key) {
  std::string out;
  out.reserve(payload.size() + 14);
  out.push_back(static_cast<char>(0x80 | (opcode & 0x0F)));
  const std::size_t n = payload.size();
  std::uint8_t mask_bit = masked ? 0x80 : 0x00;
  if (n < 126) {
    out.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8)
      out.push_back(static_cast<char>((static_cast<std::uint64_t>(n) >> shift) & 0xFF));
  }
  if (!masked) {
    out.append(payload);
    return out;
  }
  std::uint8_t key[4] = {
      static_cast<std::uint8_t>(mask_key >> 24),
      static_cast<std::uint8_t>(mask_key >> 16),
      static_cast<std::uint8_t>(mask_key >> 8),
      static_cast<std::uint8_t>(mask_key),
  };
  out.append(reinterpret_cast<const char*>(key), 4);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ key[i % 4]));
  return out;
}

std::optional<Frame> FrameDecoder::next() {
  if (bad_ || buf_.size() < 2) return std::nullopt;
  const auto* p = reinterpret_cast<const std::uint8_t*>(buf_.data());
  const std::uint8_t b0 = p[0];
  const std::uint8_t b1 = p[1];
  const bool masked = (b1 & 0x80) != 0;
  std::uint64_t len = b1 & 0x7F;
  std::size_t header = 2;
  if (len == 126) {
    if (buf_.size() < 4) return std::nullopt;
    len = (static_cast<std::uint64_t>(p[2]) << 8) | p[3];
    header = 4;
  } else if (len == 127) {
    if (buf_.size() < 10) return std::nullopt;
    len = 0;
    for (int i = 0; i < 8; ++i) len = (len << 8) | p[2 + i];
    header = 10;
    if (len > (1ULL << 31)) {  // refuse absurd frames
      bad_ = true;
      return std::nullopt;
    }
  }
  const std::size_t mask_len = masked ? 4 : 0;
  if (buf_.size() < header + mask_len + len) return std::nullopt;

  Frame f;
  f.opcode = b0 & 0x0F;
  f.fin = (b0 & 0x80) != 0;
  f.payload.assign(buf_, header + mask_len, static_cast<std::size_t>(len));
  if (masked) {
    const std::uint8_t* key = p + header;
    for (std::size_t i = 0; i < f.payload.size(); ++i)
      f.payload[i] = static_cast<char>(static_cast<std::uint8_t>(f.payload[i]) ^ key[i % 4]);
  }
  buf_.erase(0, header + mask_len + static_cast<std::size_t>(len));
  return f;
}

TcpSocket::~TcpSocket() { close(); }

TcpSocket::TcpSocket(TcpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpSocket& TcpSocket::operator=(TcpSocket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

TcpSocket TcpSocket::adopt(int fd) {
  TcpSocket s;
  s.fd_ = fd;
  return s;
}

std::optional<TcpSocket> TcpSocket::connect(const std::string& host, int port,
                                            std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string port_str = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 || !res)
    return std::nullopt;

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
    if (rc != 0 && errno == EINPROGRESS) {
      if (poll_fd(fd, POLLOUT, deadline) > 0) {
        int err = 0;
        socklen_t len = sizeof(err);
        ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        rc = err == 0 ? 0 : -1;
      } else {
        rc = -1;
      }
    }
    if (rc == 0) {
      ::fcntl(fd, F_SETFL, flags);  // back to blocking; reads use poll
      break;
    }
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) return std::nullopt;
  return adopt(fd);
}

bool TcpSocket::send_all(std::string_view data) {
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

int TcpSocket::recv_some(char* buf, std::size_t len,
                         std::chrono::steady_clock::time_point deadline) {
  for (;;) {
    int pr = poll_fd(fd_, POLLIN, deadline);
    if (pr == 0) return -2;
    if (pr < 0) {
      if (errno == EINTR) continue;
      return -1;
    }
    ssize_t n = ::recv(fd_, buf, len, 0);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      return -1;
    }
    return static_cast<int>(n);
  }
}

void TcpSocket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

Connection::Connection(TcpSocket sock, bool client_side, std::string_view preread)
    : sock_(std::move(sock)), client_side_(client_side), mask_seed_(random_u32()) {
  decoder_.feed(preread);
}

bool Connection::send_frame(std::uint8_t opcode, std::string_view payload) {
  std::lock_guard<std::mutex> lock(write_mu_);
  if (closed_ || !sock_.valid()) return false;
  mask_seed_ = mask_seed_ * 1664525u + 1013904223u;
  return sock_.send_all(encode_frame(opcode, payload, client_side_, mask_seed_));
}

bool Connection::send_text(std::string_view payload) {
  return send_frame(kOpText, payload);
}

RecvOutcome Connection::recv_text(std::string& out,
                                  std::chrono::steady_clock::time_point deadline) {
  if (closed_) return RecvOutcome::closed;
  char buf[16384];
  for (;;) {
    while (auto f = decoder_.next()) {
      switch (f->opcode) {
        case kOpText:
        case kOpBinary:
          fragments_ = std::move(f->payload);
          if (f->fin) {
            out = std::move(fragments_);
            fragments_.clear();
            return RecvOutcome::message;
          }
          break;
        case kOpContinuation:
          fragments_ += f->payload;
          if (f->fin) {
            out = std::move(fragments_);
            fragments_.clear();
            return RecvOutcome::message;
          }
          break;
        case kOpPing:
          send_frame(kOpPong, f->payload);
          break;
        case kOpPong:
          break;
        case kOpClose:
          send_frame(kOpClose, f->payload);
          closed_ = true;
          return RecvOutcome::closed;
        default:
          return RecvOutcome::failed;
      }
    }
    if (decoder_.bad()) return RecvOutcome::failed;
    int n = sock_.recv_some(buf, sizeof(buf), deadline);
    if (n == -2) return RecvOutcome::timed_out;
    if (n <= 0) {
      closed_ = true;
      return n == 0 ? RecvOutcome::closed : RecvOutcome::failed;
    }
    decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
}

void Connection::close() {
  if (!closed_ && sock_.valid()) {
    send_frame(kOpClose, "");
    closed_ = true;
  }
  sock_.close();
}

std::unique_ptr<Connection> connect_client(const std::string& host, int port,
                                           const std::string& path,
                                           std::chrono::milliseconds timeout) {
  auto sock = TcpSocket::connect(host, port, timeout);
  if (!sock) return nullptr;

  std::uint8_t nonce[16];
  for (auto& b : nonce) b = static_cast<std::uint8_t>(random_u32() & 0xFF);
  const std::string key = util::base64_encode(nonce, sizeof(nonce));

  std::string req;
  req += "GET " + (path.empty() ? std::string("/") : path) + " HTTP/1.1\r\n";
  req += "Host: " + host + ":" + std::to_string(port) + "\r\n";
  req += "Upgrade: websocket\r\n";
  req += "Connection: Upgrade\r\n";
  req += "Sec-WebSocket-Key: " + key + "\r\n";
  req += "Sec-WebSocket-Version: 13\r\n\r\n";
  if (!sock->send_all(req)) return nullptr;

  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string leftover;
  auto head = read_http_head(*sock, deadline, &leftover);
  if (!head) return nullptr;
  if (head->find(" 101 ") == std::string::npos &&
      head->rfind("HTTP/1.1 101", 0) != 0)
    return nullptr;
  auto accept = header_value(*head, "Sec-WebSocket-Accept");
  if (!accept || *accept != accept_token(key)) return nullptr;
  return std::make_unique<Connection>(std::move(*sock), /*client_side=*/true,
                                      leftover);
}

std::optional<std::string> read_http_head(
    TcpSocket& sock, std::chrono::steady_clock::time_point deadline,
    std::string* leftover) {
  std::string head;
  char buf[2048];
  while (head.find("\r\n\r\n") == std::string::npos) {
    if (head.size() > 64 * 1024) return std::nullopt;
    int n = sock.recv_some(buf, sizeof(buf), deadline);
    if (n <= 0) return std::nullopt;
    head.append(buf, static_cast<std::size_t>(n));
  }
  const std::size_t end = head.find("\r\n\r\n") + 4;
  if (leftover) leftover->assign(head, end, head.size() - end);
  head.resize(end);
  return head;
}

std::optional<std::string> header_value(std::string_view http_head,
                                        std::string_view name) {
  const std::string want = ascii_lower(name);
  std::size_t pos = 0;
  while (pos < http_head.size()) {
    std::size_t eol = http_head.find("\r\n", pos);
    if (eol == std::string_view::npos) eol = http_head.size();
    std::string_view line = http_head.substr(pos, eol - pos);
    pos = eol + 2;
    std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    if (ascii_lower(line.substr(0, colon)) == want)
      return std::string(trim(line.substr(colon + 1)));
  }
  return std::nullopt;
}

std::string make_upgrade_response(std::string_view client_key) {
  std::string resp;
  resp += "HTTP/1.1 101 Switching Protocols\r\n";
  resp += "Upgrade: websocket\r\n";
  resp += "Connection: Upgrade\r\n";
  resp += "Sec-WebSocket-Accept: " + accept_token(client_key) + "\r\n\r\n";
  return resp;
}

}  // namespace phishscope::ws
