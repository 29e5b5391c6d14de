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

#include "hasr/server.h"

#include <chrono>
#include <ctime>
#include <fstream>
#include <list>
#include <sstream>

#include "json.hpp"

#include "hasr/digest.h"

namespace hasr {
namespace {

using wire::ErrorMsg;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

bool supported(const wire::Hello& h) {
  return h.proto_version == wire::kProtoVersion && h.sample_rate == 16000 &&
         h.channels == 1 && h.bits == 16 && h.encoding == 0;
}

}  // namespace

std::vector<std::int16_t> pcm_from_bytes(std::span<const std::uint8_t> bytes) {
  std::vector<std::int16_t> out(bytes.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  }
  return out;
}

std::vector<std::uint8_t> pcm_to_bytes(std::span<const std::int16_t> pcm) {
  std::vector<std::uint8_t> out(pcm.size() * 2);
  for (std::size_t i = 0; i < pcm.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(pcm[i]);
    out[2 * i] = static_cast<std::uint8_t>(v & 0xFF);
    out[2 * i + 1] = static_cast<std::uint8_t>(v >> 8);
  }
  return out;
}

std::string pcm_digest(std::span<const std::int16_t> pcm) {
  return sha256_hex(pcm_to_bytes(pcm));
}

MockTranscriber MockTranscriber::fixed(std::string text) {
  return {Mode::kFixed, std::move(text), {}};
}

MockTranscriber MockTranscriber::table(std::map<std::string, std::string> entries) {
  return {Mode::kTable, {}, std::move(entries)};
}

MockTranscriber MockTranscriber::echo_hash() { return {Mode::kEchoHash, {}, {}}; }

Transcription MockTranscriber::transcribe(std::span<const std::int16_t> pcm) {
  if (pcm.empty()) throw BackendError(ErrorCode::kBackendFailure, "empty utterance");
  switch (mode_) {
    case Mode::kFixed:
      return {text_, 10000};
    case Mode::kEchoHash:
      return {pcm_digest(pcm), 10000};
    case Mode::kTable: {
      const std::string key = pcm_digest(pcm);
      auto it = table_.find(key);
      if (it == table_.end()) {
        throw BackendError(ErrorCode::kUnknownAudio, "no table entry for audio " + key);
      }
      return {it->second, 10000};
    }
  }
  throw BackendError(ErrorCode::kBackendFailure, "unknown mock mode");
}

std::string MockTranscriber::name() const {
  switch (mode_) {
    case Mode::kFixed: return "mock:fixed";
    case Mode::kTable: return "mock:table";
    case Mode::kEchoHash: return "mock:echohash";
  }
  return "mock";
}

std::unique_ptr<TranscriberBackend> make_backend(std::string_view spec) {
  auto bad = [&](const std::string& why) -> Error {
    return Error(ErrorCode::kInvalidConfig,
                 "backend \"" + std::string(spec) + "\": " + why +
                     " (expected mock:fixed:TEXT, mock:table:FILE or mock:echohash)");
  };
  constexpr std::string_view kFixed = "mock:fixed:";
  constexpr std::string_view kTable = "mock:table:";
  if (spec == "mock:echohash") {
    return std::make_unique<MockTranscriber>(MockTranscriber::echo_hash());
  }
  if (spec.starts_with(kFixed)) {
    std::string text(spec.substr(kFixed.size()));
    if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
      text = text.substr(1, text.size() - 2);
    }
    if (!wire::valid_utf8(text)) throw bad("text is not UTF-8");
    return std::make_unique<MockTranscriber>(MockTranscriber::fixed(std::move(text)));
  }
  if (spec.starts_with(kTable)) {
    const std::string path(spec.substr(kTable.size()));
    if (path.empty()) throw bad("missing table file");
    std::ifstream in(path);
    if (!in) throw bad("cannot open table file " + path);
    std::map<std::string, std::string> entries;
    try {
      const auto j = nlohmann::json::parse(in);
      entries = j.get<std::map<std::string, std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw bad(std::string("table file is not a JSON object of strings: ") + e.what());
    }
    return std::make_unique<MockTranscriber>(MockTranscriber::table(std::move(entries)));
  }
  throw bad("unrecognized backend");
}

SessionState::Step SessionState::fatal(std::uint16_t code, std::string message) {
  phase_ = Phase::kClosed;
  open_.clear();
  Step s;
  s.replies.push_back(ErrorMsg{code, std::move(message)});
  s.close = true;
  return s;
}

SessionState::Step SessionState::on_protocol_error(const std::string& detail) {
  return fatal(wire::kErrProtocolViolation, "malformed frame: " + detail);
}

SessionState::Step SessionState::on_message(const wire::Message& m) {
  if (phase_ == Phase::kClosed) return {{}, true};
  const std::string type(wire::type_name(wire::type_of(m)));

  if (phase_ == Phase::kAwaitHello) {
    const auto* hello = std::get_if<wire::Hello>(&m);
    if (hello == nullptr) {
      return fatal(wire::kErrProtocolViolation, "expected Hello, got " + type);
    }
    if (!supported(*hello)) {
      Step s = fatal(wire::kErrUnsupportedAudio,
                     "unsupported audio parameters: proto " +
                         std::to_string(hello->proto_version) + ", " +
                         std::to_string(hello->sample_rate) + " Hz, " +
                         std::to_string(hello->channels) + " ch, " +
                         std::to_string(hello->bits) + " bit, encoding " +
                         std::to_string(hello->encoding));
      s.replies.insert(s.replies.begin(), wire::HelloAck{0, wire::kProtoVersion});
      return s;
    }
    phase_ = Phase::kReady;
    return {{wire::HelloAck{1, wire::kProtoVersion}}, false};
  }

  if (std::holds_alternative<wire::Ping>(m)) return {{wire::Pong{}}, false};

  if (const auto* start = std::get_if<wire::UttStart>(&m)) {
    if (used_.count(start->utt_id)) {
      return fatal(wire::kErrProtocolViolation,
                   "utt_id " + std::to_string(start->utt_id) + " already used");
    }
    used_.insert(start->utt_id);
    open_[start->utt_id] = {};
    return {};
  }

  if (const auto* chunk = std::get_if<wire::AudioChunk>(&m)) {
    auto it = open_.find(chunk->utt_id);
    if (it == open_.end()) {
      return fatal(wire::kErrUnknownUtterance,
                   "AudioChunk for unknown utt_id " + std::to_string(chunk->utt_id));
    }
    if (chunk->seq != it->second.next_seq) {
      return fatal(wire::kErrProtocolViolation,
                   "utt_id " + std::to_string(chunk->utt_id) + ": expected seq " +
                       std::to_string(it->second.next_seq) + ", got " +
                       std::to_string(chunk->seq));
    }
    auto& pcm = it->second.pcm;
    if (pcm.size() + chunk->pcm.size() / 2 > limits_.max_utterance_samples) {
      return fatal(wire::kErrUnsupportedAudio,
                   "utt_id " + std::to_string(chunk->utt_id) + " exceeds " +
                       std::to_string(limits_.max_utterance_samples) + " samples");
    }
    const auto samples = pcm_from_bytes(chunk->pcm);
    pcm.insert(pcm.end(), samples.begin(), samples.end());
    ++it->second.next_seq;
    return {};
  }

  if (const auto* end = std::get_if<wire::UttEnd>(&m)) {
    auto it = open_.find(end->utt_id);
    if (it == open_.end()) {
      return fatal(wire::kErrUnknownUtterance,
                   "UttEnd for unknown utt_id " + std::to_string(end->utt_id));
    }
    std::vector<std::int16_t> pcm = std::move(it->second.pcm);
    open_.erase(it);
    return {{handler_(end->utt_id, std::move(pcm))}, false};
  }

  return fatal(wire::kErrProtocolViolation, "unexpected " + type + " from client");
}

Server::Server(ServerOptions opts, std::shared_ptr<TranscriberBackend> backend)
    : opts_(std::move(opts)), backend_(std::move(backend)) {}

Server::~Server() { stop(); }

void Server::start() {
  listener_ = net::TcpListener::bind(opts_.listen);
  port_ = listener_.port();
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void Server::stop() {
  stopping_ = true;
  if (accept_thread_.joinable()) accept_thread_.join();
  std::list<Session> sessions;
  {
    std::lock_guard<std::mutex> lock(sessions_mu_);
    sessions.swap(sessions_);
  }
  for (auto& s : sessions) s.thread.join();
  listener_.close();
}

void Server::accept_loop() {
  while (!stopping_) {
    auto stream = listener_.accept(opts_.idle_poll);
    std::lock_guard<std::mutex> lock(sessions_mu_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (it->done->load()) {
        it->thread.join();
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
    if (!stream) continue;
    auto done = std::make_shared<std::atomic<bool>>(false);
    sessions_.push_back(Session{
        std::thread([this, done, s = std::move(*stream)]() mutable {
          run_session(std::move(s));
          *done = true;
        }),
        done});
  }
}

void Server::run_session(net::TcpStream stream) {
  const std::string peer = stream.peer();
  net::MessageStream io(std::move(stream));
  SessionState session(
      [this, &peer](std::uint32_t utt_id, std::vector<std::int16_t> pcm) {
        return handle_utterance(peer, utt_id, std::move(pcm));
      },
      opts_.limits);
  try {
    while (!stopping_ && !session.closed()) {
      auto in = io.receive(opts_.idle_poll);
      if (in.status == net::MessageStream::Status::kTimeout) continue;
      if (in.status == net::MessageStream::Status::kClosed) break;
      SessionState::Step step = in.status == net::MessageStream::Status::kProtocolError
                                    ? session.on_protocol_error(in.detail)
                                    : session.on_message(in.message);
      for (const auto& reply : step.replies) io.send(reply);
      if (step.close) break;
    }
  } catch (const Error&) {
    // Peer vanished mid-write or mid-read; only this session ends.
  }
  io.stream().shutdown();
  ++sessions_served_;
}

wire::Message Server::handle_utterance(const std::string& peer, std::uint32_t utt_id,
                                       std::vector<std::int16_t> pcm) {
  try {
    Transcription t;
    if (backend_->concurrent()) {
      t = backend_->transcribe(pcm);
    } else {
      std::lock_guard<std::mutex> lock(backend_mu_);
      t = backend_->transcribe(pcm);
    }
    if (!wire::valid_utf8(t.text)) {
      return ErrorMsg{wire::kErrBackendFailure, "backend returned invalid UTF-8"};
    }
    t.confidence_bp = std::min<std::uint16_t>(t.confidence_bp, 10000);
    append_log(peer, utt_id, t);
    return wire::Transcript{utt_id, std::move(t.text), t.confidence_bp};
  } catch (const BackendError& e) {
    const std::uint16_t code = e.code() == ErrorCode::kUnknownAudio
                                   ? wire::kErrUnknownUtterance
                                   : wire::kErrBackendFailure;
    return ErrorMsg{code, e.what()};
  } catch (const std::exception& e) {
    return ErrorMsg{wire::kErrBackendFailure, std::string("backend failure: ") + e.what()};
  }
}

void Server::append_log(const std::string& peer, std::uint32_t utt_id,
                        const Transcription& t) {
  if (!opts_.log_path) return;
  nlohmann::ordered_json line{{"timestamp", utc_timestamp()},
                              {"peer", peer},
                              {"utt_id", utt_id},
                              {"text", t.text},
                              {"confidence", t.confidence_bp}};
  std::lock_guard<std::mutex> lock(log_mu_);
  std::ofstream out(*opts_.log_path, std::ios::app);
  out << line.dump() << "\n";
}

void run_server(const net::Endpoint& listen, std::shared_ptr<TranscriberBackend> backend,
                std::optional<std::filesystem::path> log_path,
                const std::atomic<bool>* stop) {
  ServerOptions opts;
  opts.listen = listen;
  opts.log_path = std::move(log_path);
  Server server(std::move(opts), std::move(backend));
  server.start();
  while (stop == nullptr || !stop->load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  server.stop();
}

}  // namespace hasr
