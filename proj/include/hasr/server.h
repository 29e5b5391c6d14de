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

#ifndef HASR_SERVER_H_
#define HASR_SERVER_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "hasr/error.h"
#include "hasr/net.h"
#include "hasr/protocol.h"

namespace hasr {

struct Transcription {
  std::string text;
  std::uint16_t confidence_bp = 0;
};

// Raised by backends. The wire error code is 1004 for kUnknownAudio and 1003
// for everything else.
class BackendError : public Error {
 public:
  using Error::Error;
};

class TranscriberBackend {
 public:
  virtual ~TranscriberBackend() = default;
  // pcm is 16 kHz mono int16.
  virtual Transcription transcribe(std::span<const std::int16_t> pcm) = 0;
  // Whether transcribe() may run on several sessions at once. The server
  // serializes calls to backends that return false.
  virtual bool concurrent() const { return false; }
  virtual std::string name() const = 0;
};

class MockTranscriber : public TranscriberBackend {
 public:
  enum class Mode { kFixed, kTable, kEchoHash };

  static MockTranscriber fixed(std::string text);
  // Keys are sha256_hex of the little-endian PCM bytes.
  static MockTranscriber table(std::map<std::string, std::string> entries);
  static MockTranscriber echo_hash();

  Transcription transcribe(std::span<const std::int16_t> pcm) override;
  bool concurrent() const override { return true; }
  std::string name() const override;
  Mode mode() const { return mode_; }

 private:
  MockTranscriber(Mode mode, std::string text, std::map<std::string, std::string> table)
      : mode_(mode), text_(std::move(text)), table_(std::move(table)) {}

  Mode mode_;
  std::string text_;
  std::map<std::string, std::string> table_;
};

// sha256_hex of the PCM as little-endian bytes, i.e. the wire payload.
std::string pcm_digest(std::span<const std::int16_t> pcm);
std::vector<std::int16_t> pcm_from_bytes(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> pcm_to_bytes(std::span<const std::int16_t> pcm);

// Parses mock:fixed:TEXT | mock:table:FILE | mock:echohash (TEXT may be
// quoted). Throws kInvalidConfig on anything else.
std::unique_ptr<TranscriberBackend> make_backend(std::string_view spec);

struct SessionLimits {
  std::size_t max_utterance_samples = 960000;  // 30 s at 16 kHz
};

// The server side of one connection, independent of sockets. Each inbound
// message yields the replies to send and whether to close afterwards.
class SessionState {
 public:
  using UtteranceHandler =
      std::function<wire::Message(std::uint32_t utt_id, std::vector<std::int16_t> pcm)>;

  struct Step {
    std::vector<wire::Message> replies;
    bool close = false;
  };

  SessionState(UtteranceHandler handler, SessionLimits limits = {})
      : handler_(std::move(handler)), limits_(limits) {}

  Step on_message(const wire::Message& m);
  // Inbound bytes that could not be decoded.
  Step on_protocol_error(const std::string& detail);

  bool handshaken() const { return phase_ == Phase::kReady; }
  bool closed() const { return phase_ == Phase::kClosed; }
  std::size_t open_utterances() const { return open_.size(); }

 private:
  enum class Phase { kAwaitHello, kReady, kClosed };
  struct OpenUtterance {
    std::uint32_t next_seq = 0;
    std::vector<std::int16_t> pcm;
  };

  Step fatal(std::uint16_t code, std::string message);

  UtteranceHandler handler_;
  SessionLimits limits_;
  Phase phase_ = Phase::kAwaitHello;
  std::map<std::uint32_t, OpenUtterance> open_;
  std::set<std::uint32_t> used_;
};

struct ServerOptions {
  net::Endpoint listen;
  std::optional<std::filesystem::path> log_path;
  SessionLimits limits;
  std::chrono::milliseconds idle_poll{100};
};

// TCP front end: one thread per connection, sessions isolated from each
// other, backend calls serialized unless the backend is concurrent.
class Server {
 public:
  Server(ServerOptions opts, std::shared_ptr<TranscriberBackend> backend);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts accepting. Throws kBindFailed.
  void start();
  std::uint16_t port() const { return port_; }
  // Stops accepting, ends every session and joins all threads.
  void stop();

  std::size_t sessions_served() const { return sessions_served_.load(); }

 private:
  void accept_loop();
  void run_session(net::TcpStream stream);
  wire::Message handle_utterance(const std::string& peer, std::uint32_t utt_id,
                                 std::vector<std::int16_t> pcm);
  void append_log(const std::string& peer, std::uint32_t utt_id, const Transcription& t);

  ServerOptions opts_;
  std::shared_ptr<TranscriberBackend> backend_;
  net::TcpListener listener_;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::atomic<std::size_t> sessions_served_{0};
  std::thread accept_thread_;
  struct Session {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::mutex sessions_mu_;
  std::list<Session> sessions_;  // finished ones are joined by the accept loop
  std::mutex backend_mu_;
  std::mutex log_mu_;
};

// Serves until `stop` becomes true (or forever when null).
void run_server(const net::Endpoint& listen, std::shared_ptr<TranscriberBackend> backend,
                std::optional<std::filesystem::path> log_path,
                const std::atomic<bool>* stop = nullptr);

}  // namespace hasr

#endif  // HASR_SERVER_H_
