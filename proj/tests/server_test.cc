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

#include <atomic>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "hasr/error.h"
#include "hasr/net.h"
#include "hasr/server.h"
#include "json.hpp"
#include "test_util.h"

namespace hasr {
namespace {

using namespace std::chrono_literals;
using wire::Message;

// From tests/oracles/wire_vectors.py: sha256 of 3200 samples
// ((i * 37) % 65536) - 32768 as little-endian bytes.
constexpr const char* kRampDigest =
    "94bb4dd552c26e05aa454c0c086d794ff16b911554ca07274e6e71e67e6e4682";

std::vector<std::int16_t> ramp() {
  std::vector<std::int16_t> pcm(3200);
  for (int i = 0; i < 3200; ++i) pcm[i] = static_cast<std::int16_t>((i * 37) % 65536 - 32768);
  return pcm;
}

template <typename T>
const T& as(const Message& m) {
  REQUIRE(std::holds_alternative<T>(m));
  return std::get<T>(m);
}

SessionState echo_session(SessionLimits limits = {}) {
  return SessionState(
      [](std::uint32_t id, std::vector<std::int16_t> pcm) -> Message {
        return wire::Transcript{id, pcm_digest(pcm), 10000};
      },
      limits);
}

SessionState ready_session(SessionLimits limits = {}) {
  SessionState s = echo_session(limits);
  s.on_message(wire::Hello{});
  return s;
}

std::uint16_t fatal_code(const SessionState::Step& step) {
  CHECK(step.close);
  REQUIRE(!step.replies.empty());
  return as<wire::ErrorMsg>(step.replies.back()).code;
}

struct Client {
  explicit Client(std::uint16_t port)
      : io(net::TcpStream::connect({"127.0.0.1", port}, 2000ms)) {}

  void hello() {
    io.send(wire::Hello{});
    CHECK(as<wire::HelloAck>(next()).accepted == 1);
  }
  Message next() {
    auto r = io.receive(5000ms);
    REQUIRE(r.status == net::MessageStream::Status::kMessage);
    return r.message;
  }
  void send_utterance(std::uint32_t id, const std::vector<std::int16_t>& pcm) {
    io.send(wire::UttStart{id});
    for (auto& c : wire::chunk_audio(id, pcm_to_bytes(pcm))) io.send(c);
    io.send(wire::UttEnd{id});
  }
  net::MessageStream io;
};

TEST_SUITE("server") {
  TEST_CASE("mock transcribers") {
    const auto pcm = ramp();
    auto fixed = MockTranscriber::fixed("hello world");
    const auto t = fixed.transcribe(pcm);
    CHECK(t.text == "hello world");
    CHECK(t.confidence_bp == 10000);

    auto echo = MockTranscriber::echo_hash();
    CHECK(echo.transcribe(pcm).text == kRampDigest);
    auto other = pcm;
    other[5] ^= 1;
    CHECK(echo.transcribe(other).text != kRampDigest);
    CHECK(echo.transcribe(pcm).text == echo.transcribe(pcm).text);

    auto empty_table = MockTranscriber::table({});
    try {
      empty_table.transcribe(pcm);
      FAIL("expected an error");
    } catch (const BackendError& e) {
      CHECK(e.code() == ErrorCode::kUnknownAudio);
    }
    auto table = MockTranscriber::table({{kRampDigest, "ramp"}});
    CHECK(table.transcribe(pcm).text == "ramp");
    CHECK_THROWS_AS(fixed.transcribe({}), BackendError);
  }

  TEST_CASE("digest helpers") {
    CHECK(pcm_digest(ramp()) == kRampDigest);
    const auto b = pcm_to_bytes(ramp());
    CHECK(b.size() == 6400);
    CHECK(testing::evp_sha256_hex(b) == kRampDigest);
    CHECK(pcm_from_bytes(b) == ramp());
  }

  TEST_CASE("backend specs") {
    CHECK(make_backend("mock:echohash")->name() == "mock:echohash");
    auto fixed = make_backend("mock:fixed:\"hello world\"");
    CHECK(fixed->transcribe(ramp()).text == "hello world");
    CHECK(make_backend("mock:fixed:hi")->transcribe(ramp()).text == "hi");
    for (const char* bad : {"", "mock", "mock:nope", "whisper", "mock:table:",
                            "mock:table:/nonexistent.json"}) {
      try {
        make_backend(bad);
        FAIL("expected an error for " << bad);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kInvalidConfig);
      }
    }
    testing::TempDir dir("backend");
    std::ofstream(dir / "t.json") << "{\"" << kRampDigest << "\": \"ramp\"}";
    auto table = make_backend("mock:table:" + (dir / "t.json").string());
    CHECK(table->transcribe(ramp()).text == "ramp");
    std::ofstream(dir / "bad.json") << "[1, 2]";
    CHECK_THROWS_AS(make_backend("mock:table:" + (dir / "bad.json").string()), Error);
  }

  TEST_CASE("grammar: handshake") {
    SessionState s = echo_session();
    auto step = s.on_message(wire::Hello{});
    CHECK(!step.close);
    CHECK(as<wire::HelloAck>(step.replies.at(0)) == wire::HelloAck{1, 1});
    CHECK(s.handshaken());

    SessionState low = echo_session();
    step = low.on_message(wire::Hello{1, 8000, 1, 16, 0});
    REQUIRE(step.replies.size() == 2);
    CHECK(as<wire::HelloAck>(step.replies[0]).accepted == 0);
    CHECK(fatal_code(step) == wire::kErrUnsupportedAudio);
    CHECK(low.closed());

    SessionState early = echo_session();
    CHECK(fatal_code(early.on_message(wire::UttStart{1})) == wire::kErrProtocolViolation);
  }

  TEST_CASE("grammar: utterances") {
    SessionState s = ready_session();
    CHECK(as<wire::Pong>(s.on_message(wire::Ping{}).replies.at(0)) == wire::Pong{});
    CHECK(s.on_message(wire::UttStart{1}).replies.empty());
    CHECK(s.on_message(wire::UttStart{2}).replies.empty());
    CHECK(s.open_utterances() == 2);
    const auto bytes = pcm_to_bytes(ramp());
    for (auto& c : wire::chunk_audio(1, bytes, 1000)) CHECK(s.on_message(c).replies.empty());
    s.on_message(wire::AudioChunk{2, 0, {1, 0}});
    const auto step = s.on_message(wire::UttEnd{1});
    CHECK(as<wire::Transcript>(step.replies.at(0)).text == kRampDigest);
    CHECK(as<wire::Transcript>(s.on_message(wire::UttEnd{2}).replies.at(0)).utt_id == 2);
    CHECK(s.open_utterances() == 0);
    CHECK(!s.closed());
  }

  TEST_CASE("grammar: violations close the session") {
    {
      SessionState s = ready_session();
      s.on_message(wire::UttStart{1});
      s.on_message(wire::AudioChunk{1, 0, {0, 0}});
      CHECK(fatal_code(s.on_message(wire::AudioChunk{1, 2, {0, 0}})) ==
            wire::kErrProtocolViolation);
      CHECK(s.closed());
      CHECK(s.on_message(wire::Ping{}).replies.empty());
    }
    {
      SessionState s = ready_session();
      s.on_message(wire::UttStart{1});
      CHECK(fatal_code(s.on_message(wire::UttStart{1})) == wire::kErrProtocolViolation);
    }
    {
      SessionState s = ready_session();
      s.on_message(wire::UttStart{1});
      s.on_message(wire::UttEnd{1});
      CHECK(fatal_code(s.on_message(wire::UttStart{1})) == wire::kErrProtocolViolation);
    }
    {
      SessionState s = ready_session();
      CHECK(fatal_code(s.on_message(wire::AudioChunk{5, 0, {0, 0}})) ==
            wire::kErrUnknownUtterance);
    }
    {
      SessionState s = ready_session();
      CHECK(fatal_code(s.on_message(wire::UttEnd{5})) == wire::kErrUnknownUtterance);
    }
    {
      SessionState s = ready_session();
      CHECK(fatal_code(s.on_message(wire::Hello{})) == wire::kErrProtocolViolation);
    }
    {
      SessionState s = ready_session();
      CHECK(fatal_code(s.on_message(wire::Transcript{1, "x", 0})) == wire::kErrProtocolViolation);
    }
    {
      SessionState s = ready_session({100});
      s.on_message(wire::UttStart{1});
      s.on_message(wire::AudioChunk{1, 0, std::vector<std::uint8_t>(180, 0)});
      CHECK(fatal_code(s.on_message(wire::AudioChunk{1, 1, std::vector<std::uint8_t>(40, 0)})) ==
            wire::kErrUnsupportedAudio);
    }
    {
      SessionState s = ready_session();
      CHECK(fatal_code(s.on_protocol_error("junk")) == wire::kErrProtocolViolation);
    }
  }

  TEST_CASE("echo hash over TCP, with log") {
    testing::TempDir dir("srv");
    ServerOptions opts;
    opts.listen = {"127.0.0.1", 0};
    opts.log_path = dir / "log.jsonl";
    Server server(opts, std::make_shared<MockTranscriber>(MockTranscriber::echo_hash()));
    server.start();
    {
      Client c(server.port());
      c.hello();
      c.send_utterance(1, ramp());
      const Message reply = c.next();
      const auto& t = as<wire::Transcript>(reply);
      CHECK(t.utt_id == 1);
      CHECK(t.text == kRampDigest);
      CHECK(t.confidence_bp == 10000);
      c.io.send(wire::Ping{});
      CHECK(std::holds_alternative<wire::Pong>(c.next()));
    }
    server.stop();
    std::ifstream in(dir / "log.jsonl");
    std::string line;
    REQUIRE(std::getline(in, line));
    const auto j = nlohmann::json::parse(line);
    CHECK(j.at("utt_id") == 1);
    CHECK(j.at("text") == kRampDigest);
    CHECK(j.at("confidence") == 10000);
    CHECK(j.at("peer").get<std::string>().rfind("127.0.0.1:", 0) == 0);
    CHECK(j.at("timestamp").get<std::string>().size() == 24);
  }

  TEST_CASE("table miss is per utterance") {
    ServerOptions opts;
    opts.listen = {"127.0.0.1", 0};
    Server server(opts, std::make_shared<MockTranscriber>(
                            MockTranscriber::table({{kRampDigest, "ramp"}})));
    server.start();
    Client c(server.port());
    c.hello();
    auto other = ramp();
    other[0] = 0;
    c.send_utterance(1, other);
    CHECK(as<wire::ErrorMsg>(c.next()).code == wire::kErrUnknownUtterance);
    c.send_utterance(2, ramp());
    CHECK(as<wire::Transcript>(c.next()).text == "ramp");
  }

  TEST_CASE("bad hello over TCP") {
    ServerOptions opts;
    opts.listen = {"127.0.0.1", 0};
    Server server(opts, std::make_shared<MockTranscriber>(MockTranscriber::fixed("x")));
    server.start();
    Client c(server.port());
    c.io.send(wire::Hello{1, 8000, 1, 16, 0});
    CHECK(as<wire::HelloAck>(c.next()).accepted == 0);
    CHECK(as<wire::ErrorMsg>(c.next()).code == wire::kErrUnsupportedAudio);
    CHECK(c.io.receive(2000ms).status == net::MessageStream::Status::kClosed);
  }

  TEST_CASE("eight concurrent sessions, one misbehaving client") {
    ServerOptions opts;
    opts.listen = {"127.0.0.1", 0};
    Server server(opts, std::make_shared<MockTranscriber>(MockTranscriber::echo_hash()));
    server.start();

    std::thread rogue([&] {
      net::TcpStream s = net::TcpStream::connect({"127.0.0.1", server.port()}, 2000ms);
      const std::vector<std::uint8_t> junk = {0, 0, 0, 1, 0x77, 1, 2, 3};
      s.write_all(junk);
      net::MessageStream io(std::move(s));
      auto r = io.receive(5000ms);
      CHECK(r.status == net::MessageStream::Status::kMessage);
      CHECK(as<wire::ErrorMsg>(r.message).code == wire::kErrProtocolViolation);
    });

    std::atomic<int> ok{0};
    std::vector<std::thread> clients;
    for (int k = 0; k < 8; ++k) {
      clients.emplace_back([&, k] {
        Client c(server.port());
        c.hello();
        for (std::uint32_t u = 1; u <= 3; ++u) {
          std::vector<std::int16_t> pcm(1600 + 160 * k + u);
          for (std::size_t i = 0; i < pcm.size(); ++i) {
            pcm[i] = static_cast<std::int16_t>(i * (k + 3) + u);
          }
          c.send_utterance(u, pcm);
          const Message reply = c.next();
          const auto& t = as<wire::Transcript>(reply);
          if (t.utt_id == u && t.text == testing::evp_sha256_hex(pcm_to_bytes(pcm))) ++ok;
        }
      });
    }
    for (auto& t : clients) t.join();
    rogue.join();
    CHECK(ok == 24);
    server.stop();
    CHECK(server.sessions_served() == 9);
  }

  TEST_CASE("bind failure") {
    ServerOptions opts;
    opts.listen = {"127.0.0.1", 0};
    Server a(opts, std::make_shared<MockTranscriber>(MockTranscriber::fixed("x")));
    a.start();
    opts.listen.port = a.port();
    Server b(opts, std::make_shared<MockTranscriber>(MockTranscriber::fixed("x")));
    try {
      b.start();
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kBindFailed);
    }
  }
}

}  // namespace
}  // namespace hasr
