// Copyright (c) 2026 The hybrid-asr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hasr/net.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "hasr/error.h"

namespace hasr::net {
namespace {

std::string errno_text() { return std::strerror(errno); }

std::string describe_peer(const sockaddr_storage& addr) {
  char host[INET6_ADDRSTRLEN] = {0};
  std::uint16_t port = 0;
  if (addr.ss_family == AF_INET) {
    const auto* a = reinterpret_cast<const sockaddr_in*>(&addr);
    inet_ntop(AF_INET, &a->sin_addr, host, sizeof host);
    port = ntohs(a->sin_port);
  } else if (addr.ss_family == AF_INET6) {
    const auto* a = reinterpret_cast<const sockaddr_in6*>(&addr);
    inet_ntop(AF_INET6, &a->sin6_addr, host, sizeof host);
    port = ntohs(a->sin6_port);
  }
  return std::string(host) + ":" + std::to_string(port);
}

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) freeaddrinfo(head);
  }
};

int resolve(const Endpoint& ep, bool passive, AddrInfo& out) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  const std::string port = std::to_string(ep.port);
  const char* host = ep.host.empty() ? nullptr : ep.host.c_str();
  return getaddrinfo(host, port.c_str(), &hints, &out.head);
}

bool wait_fd(int fd, short events, std::optional<std::chrono::milliseconds> timeout) {
  pollfd p{fd, events, 0};
  const int ms = timeout ? static_cast<int>(timeout->count()) : -1;
  for (;;) {
    const int r = ::poll(&p, 1, ms);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw Error(ErrorCode::kIo, "poll: " + errno_text());
    return r > 0;
  }
}

}  // namespace

Endpoint parse_endpoint(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidConfig,
                "address \"" + std::string(text) + "\" is not host:port");
  }
  Endpoint ep;
  ep.host = std::string(text.substr(0, colon));
  const auto port_text = text.substr(colon + 1);
  unsigned port = 0;
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size() || port > 65535) {
    throw Error(ErrorCode::kInvalidConfig,
                "address \"" + std::string(text) + "\" has an invalid port");
  }
  ep.port = static_cast<std::uint16_t>(port);
  return ep;
}

TcpStream::TcpStream(int fd) : fd_(fd) {
  sockaddr_storage addr{};
  socklen_t len = sizeof addr;
  if (getpeername(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
    peer_ = describe_peer(addr);
  }
  const int one = 1;
  setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpStream::~TcpStream() { close(); }

TcpStream::TcpStream(TcpStream&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), peer_(std::move(other.peer_)) {}

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    peer_ = std::move(other.peer_);
  }
  return *this;
}

TcpStream TcpStream::connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
  AddrInfo ai;
  if (const int rc = resolve(ep, false, ai); rc != 0) {
    throw Error(ErrorCode::kConnectFailed,
                "cannot resolve " + ep.to_string() + ": " + gai_strerror(rc));
  }
  std::string last_error = "no address";
  for (addrinfo* a = ai.head; a != nullptr; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    const int flags = fcntl(fd, F_GETFL, 0);
    fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, a->ai_addr, a->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      if (wait_fd(fd, POLLOUT, timeout)) {
        int err = 0;
        socklen_t len = sizeof err;
        getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
        rc = err == 0 ? 0 : -1;
        errno = err;
      } else {
        errno = ETIMEDOUT;
      }
    }
    if (rc == 0) {
      fcntl(fd, F_SETFL, flags);
      return TcpStream(fd);
    }
    last_error = errno_text();
    ::close(fd);
  }
  throw Error(ErrorCode::kConnectFailed,
              "cannot connect to " + ep.to_string() + ": " + last_error);
}

void TcpStream::write_all(std::span<const std::uint8_t> bytes) {
  std::size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::send(fd_, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIo, "send: " + errno_text());
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::size_t> TcpStream::read_some(
    std::span<std::uint8_t> out, std::optional<std::chrono::milliseconds> timeout) {
  if (timeout && !wait_fd(fd_, POLLIN, timeout)) return std::nullopt;
  for (;;) {
    const ssize_t n = ::recv(fd_, out.data(), out.size(), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw Error(ErrorCode::kIo, "recv: " + errno_text());
    return static_cast<std::size_t>(n);
  }
}

void TcpStream::shutdown() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void TcpStream::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

TcpListener TcpListener::bind(const Endpoint& ep) {
  AddrInfo ai;
  if (const int rc = resolve(ep, true, ai); rc != 0) {
    throw Error(ErrorCode::kBindFailed,
                "cannot resolve " + ep.to_string() + ": " + gai_strerror(rc));
  }
  std::string last_error = "no address";
  for (addrinfo* a = ai.head; a != nullptr; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) {
      last_error = errno_text();
      continue;
    }
    const int one = 1;
    setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
      TcpListener l;
      l.fd_ = fd;
      sockaddr_in bound{};
      socklen_t len = sizeof bound;
      getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
      l.port_ = ntohs(bound.sin_port);
      return l;
    }
    last_error = errno_text();
    ::close(fd);
  }
  throw Error(ErrorCode::kBindFailed, "cannot bind " + ep.to_string() + ": " + last_error);
}

TcpListener::~TcpListener() { close(); }

TcpListener::TcpListener(TcpListener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = std::exchange(other.fd_, -1);
    port_ = other.port_;
  }
  return *this;
}

std::optional<TcpStream> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (fd_ < 0 || !wait_fd(fd_, POLLIN, timeout)) return std::nullopt;
  const int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) return std::nullopt;
  return TcpStream(fd);
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void MessageStream::send(const wire::Message& m) {
  stream_.write_all(wire::encode(m));
}

MessageStream::Received MessageStream::receive(
    std::optional<std::chrono::milliseconds> timeout) {
  const auto deadline =
      timeout ? std::optional(std::chrono::steady_clock::now() + *timeout) : std::nullopt;
  for (;;) {
    const wire::DecodeResult r = wire::decode(buffer_);
    if (r.status == wire::DecodeStatus::kMessage) {
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(r.consumed));
      return {Status::kMessage, r.message, wire::ProtocolError::kNone, {}};
    }
    if (r.status == wire::DecodeStatus::kProtocolError) {
      return {Status::kProtocolError, {}, r.error, r.detail};
    }
    std::optional<std::chrono::milliseconds> remaining;
    if (deadline) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          *deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) return {Status::kTimeout, {}, {}, {}};
      remaining = left;
    }
    std::uint8_t chunk[65536];
    const auto n = stream_.read_some(chunk, remaining);
    if (!n) return {Status::kTimeout, {}, {}, {}};
    if (*n == 0) return {Status::kClosed, {}, {}, {}};
    buffer_.insert(buffer_.end(), chunk, chunk + *n);
  }
}

}  // namespace hasr::net
