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

#ifndef HASR_NET_H_
#define HASR_NET_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hasr/protocol.h"

namespace hasr::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
};

// "host:port"; an empty host means 0.0.0.0. Throws kInvalidConfig.
Endpoint parse_endpoint(std::string_view text);

class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(int fd);
  ~TcpStream();
  TcpStream(TcpStream&& other) noexcept;
  TcpStream& operator=(TcpStream&& other) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  // Throws kConnectFailed.
  static TcpStream connect(const Endpoint& ep, std::chrono::milliseconds timeout);

  bool is_open() const { return fd_ >= 0; }
  // Throws kIo on failure.
  void write_all(std::span<const std::uint8_t> bytes);
  // 0 on orderly close; throws kIo on error. Waits at most `timeout` when
  // given and returns std::nullopt if nothing arrived.
  std::optional<std::size_t> read_some(std::span<std::uint8_t> out,
                                       std::optional<std::chrono::milliseconds> timeout);
  void shutdown();
  void close();
  std::string peer() const { return peer_; }

 private:
  int fd_ = -1;
  std::string peer_;
};

class TcpListener {
 public:
  // Throws kBindFailed.
  static TcpListener bind(const Endpoint& ep);
  TcpListener() = default;
  ~TcpListener();
  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  // Waits up to `timeout`; std::nullopt when nothing connected.
  std::optional<TcpStream> accept(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

// Framed message I/O over a stream.
class MessageStream {
 public:
  enum class Status { kMessage, kClosed, kTimeout, kProtocolError };
  struct Received {
    Status status = Status::kClosed;
    wire::Message message;
    wire::ProtocolError error = wire::ProtocolError::kNone;
    std::string detail;
  };

  explicit MessageStream(TcpStream stream) : stream_(std::move(stream)) {}

  void send(const wire::Message& m);
  Received receive(std::optional<std::chrono::milliseconds> timeout = std::nullopt);

  TcpStream& stream() { return stream_; }

 private:
  TcpStream stream_;
  std::vector<std::uint8_t> buffer_;
};

// Blocking FIFO with a fixed capacity. close() wakes every waiter; pop then
// drains what is left and returns std::nullopt once empty.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  // false if the queue was closed.
  bool push(T item) {
    std::unique_lock<std::mutex> lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock<std::mutex> lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard<std::mutex> lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return items_.size();
  }
  std::size_t capacity() const { return capacity_; }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
};

}  // namespace hasr::net

#endif  // HASR_NET_H_
