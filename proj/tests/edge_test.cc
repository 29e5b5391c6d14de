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

#include <algorithm>
#include <mutex>

#include "doctest.h"
#include "hasr/edge.h"
#include "hasr/endpoint.h"
#include "hasr/error.h"
#include "hasr/server.h"
#include "hasr/synth.h"
#include "json.hpp"
#include "test_util.h"

namespace hasr {
namespace {

struct Recorder {
  EdgeRuntime::Sink sink() {
    return [this](const EdgeEvent& e) {
      std::lock_guard<std::mutex> lock(mu);
      events.push_back(e);
    };
  }
  std::vector<EdgeEvent> of(EventKind k) const {
    std::vector<EdgeEvent> out;
    for (const auto& e : events) {
      if (e.kind == k) out.push_back(e);
    }
    return out;
  }
  std::mutex mu;
  std::vector<EdgeEvent> events;
};

// go, stop, go separated by 0.6 s of noise.
AudioClip three_words() {
  return testing::concat_with_gaps({synth_word_clip("go", 99, 0), synth_word_clip("stop", 99, 1),
                                    synth_word_clip("go", 99, 2)},
                                   0.6, 0.004, 5);
}

std::uint16_t dead_port() {
  auto l = net::TcpListener::bind({"127.0.0.1", 0});
  const std::uint16_t port = l.port();
  l.close();
  return port;
}

struct TestServer {
  explicit TestServer(MockTranscriber backend) {
    ServerOptions opts;
    opts.listen = {"127.0.0.1", 0};
    server = std::make_unique<Server>(opts, std::make_shared<MockTranscriber>(std::move(backend)));
    server->start();
  }
  net::Endpoint endpoint() const { return {"127.0.0.1", server->port()}; }
  std::unique_ptr<Server> server;
};

TEST_SUITE("edge") {
  TEST_CASE("policy names") {
    CHECK(parse_policy("local") == EdgePolicy::kLocalOnly);
    CHECK(parse_policy("remote") == EdgePolicy::kRemoteOnly);
    CHECK(parse_policy("hybrid") == EdgePolicy::kHybrid);
    CHECK(!parse_policy("Hybrid"));
    for (auto p : {EdgePolicy::kLocalOnly, EdgePolicy::kRemoteOnly, EdgePolicy::kHybrid}) {
      CHECK(parse_policy(policy_name(p)) == p);
    }
  }

  TEST_CASE("event json layout") {
    EdgeEvent k{EventKind::kKeyword, 3, "go", -1.5, 2.25, 0.0, std::nullopt};
    CHECK(event_to_json(k) ==
          R"({"kind":"Keyword","utt_id":3,"word":"go","score":-1.5,"compute_ms":2.25,)"
          R"("wall_ms_since_utt_end":0.0})");
    EdgeEvent t{EventKind::kTranscript, 4, "hello world", std::nullopt, std::nullopt, 12.5,
                std::nullopt};
    CHECK(event_to_json(t) ==
          R"({"kind":"Transcript","utt_id":4,"text":"hello world","score":null,)"
          R"("compute_ms":null,"wall_ms_since_utt_end":12.5})");
    EdgeEvent r{EventKind::kRejected, 5, "", -9.0, 1.0, 0.0, std::nullopt};
    CHECK(nlohmann::json::parse(event_to_json(r)).at("word").is_null());
    EdgeEvent e{EventKind::kError, 6, "server unavailable", std::nullopt, std::nullopt, 0.0,
                std::uint16_t{1003}};
    const auto j = nlohmann::json::parse(event_to_json(e));
    CHECK(j.at("code") == 1003);
    CHECK(j.at("text") == "server unavailable");
  }

  TEST_CASE("config errors") {
    EdgeConfig cfg;
    CHECK_THROWS_AS(EdgeRuntime(cfg, nullptr, [](const EdgeEvent&) {}), Error);
    cfg.policy = EdgePolicy::kRemoteOnly;
    try {
      EdgeRuntime rt(cfg, nullptr, [](const EdgeEvent&) {});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidConfig);
    }
  }

  TEST_CASE("silence yields no events") {
    Recorder rec;
    EdgeRuntime rt({}, testing::small_model(), rec.sink());
    rt.process_clip(synth_silence(48000, 0.005, 3));
    rt.finish();
    CHECK(rec.events.empty());
    CHECK(rt.utterances() == 0);
  }

  TEST_CASE("local keywords") {
    Recorder rec;
    EdgeRuntime rt({}, testing::small_model(), rec.sink());
    rt.process_clip(three_words());
    rt.finish();
    REQUIRE(rec.events.size() == 3);
    const std::vector<std::string> want = {"go", "stop", "go"};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& e = rec.events[i];
      CHECK(e.kind == EventKind::kKeyword);
      CHECK(e.utt_id == i + 1);
      CHECK(e.text == want[i]);
      REQUIRE(e.compute_ms);
      CHECK(*e.compute_ms >= 0.0);
      CHECK(e.score);
    }
  }

  TEST_CASE("threshold rejects") {
    Recorder rec;
    EdgeConfig cfg;
    cfg.threshold = 1.0;  // per-frame log-likelihoods are negative
    EdgeRuntime rt(cfg, testing::small_model(), rec.sink());
    rt.process_clip(three_words());
    rt.finish();
    REQUIRE(rec.events.size() == 3);
    for (const auto& e : rec.events) CHECK(e.kind == EventKind::kRejected);
  }

  TEST_CASE("streaming matches batch") {
    const AudioClip clip = three_words();
    Recorder batch, stream;
    {
      EdgeRuntime rt({}, testing::small_model(), batch.sink());
      rt.process_clip(clip);
      rt.finish();
    }
    {
      EdgeRuntime rt({}, testing::small_model(), stream.sink());
      Rng rng(4);
      std::size_t at = 0;
      while (at < clip.size()) {
        const std::size_t n = std::min(clip.size() - at, 1 + rng.index(5000));
        rt.feed(std::span<const double>(clip.samples).subspan(at, n));
        at += n;
      }
      rt.finish();
      rt.finish();
    }
    REQUIRE(batch.events.size() == stream.events.size());
    for (std::size_t i = 0; i < batch.events.size(); ++i) {
      CHECK(batch.events[i].utt_id == stream.events[i].utt_id);
      CHECK(batch.events[i].text == stream.events[i].text);
      CHECK(*batch.events[i].score == doctest::Approx(*stream.events[i].score).epsilon(1e-12));
    }
  }

  TEST_CASE("hybrid: keyword first, then transcript") {
    TestServer srv(MockTranscriber::fixed("hello world"));
    Recorder rec;
    EdgeConfig cfg;
    cfg.policy = EdgePolicy::kHybrid;
    cfg.server = srv.endpoint();
    EdgeRuntime rt(cfg, testing::small_model(), rec.sink());
    CHECK(rt.remote_connected());
    rt.process_clip(three_words());
    rt.finish();
    CHECK(!rt.remote_failed());
    REQUIRE(rec.events.size() == 6);
    for (std::uint32_t id = 1; id <= 3; ++id) {
      std::ptrdiff_t kw = -1, tr = -1;
      for (std::size_t i = 0; i < rec.events.size(); ++i) {
        const auto& e = rec.events[i];
        if (e.utt_id != id) continue;
        if (e.kind == EventKind::kKeyword) kw = static_cast<std::ptrdiff_t>(i);
        if (e.kind == EventKind::kTranscript) {
          tr = static_cast<std::ptrdiff_t>(i);
          CHECK(e.text == "hello world");
          CHECK(e.wall_ms_since_utt_end >= 0.0);
        }
      }
      CHECK(kw >= 0);
      CHECK(tr > kw);
    }
  }

  TEST_CASE("remote digests equal segment PCM digests") {
    TestServer srv(MockTranscriber::echo_hash());
    const AudioClip clip = three_words();
    std::vector<std::string> expected;
    for (const auto& s : segment(clip)) {
      const auto pcm = samples_to_pcm(
          std::span<const double>(clip.samples).subspan(s.start_sample, s.size()));
      expected.push_back(testing::evp_sha256_hex(pcm));
    }
    REQUIRE(expected.size() == 3);

    Recorder rec;
    EdgeConfig cfg;
    cfg.policy = EdgePolicy::kRemoteOnly;
    cfg.server = srv.endpoint();
    cfg.chunk_bytes = 1000;
    EdgeRuntime rt(cfg, nullptr, rec.sink());
    rt.process_clip(clip);
    rt.finish();
    const auto transcripts = rec.of(EventKind::kTranscript);
    REQUIRE(transcripts.size() == 3);
    for (const auto& t : transcripts) CHECK(t.text == expected.at(t.utt_id - 1));
    CHECK(rec.of(EventKind::kKeyword).empty());
  }

  TEST_CASE("table miss becomes an error event for that utterance") {
    TestServer srv(MockTranscriber::table({}));
    Recorder rec;
    EdgeConfig cfg;
    cfg.policy = EdgePolicy::kRemoteOnly;
    cfg.server = srv.endpoint();
    EdgeRuntime rt(cfg, nullptr, rec.sink());
    rt.process_clip(three_words());
    rt.finish();
    const auto errors = rec.of(EventKind::kError);
    REQUIRE(errors.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(errors[i].code == std::optional<std::uint16_t>(1004));
    }
    CHECK(!rt.remote_failed());
  }

  TEST_CASE("unreachable server") {
    EdgeConfig cfg;
    cfg.server = net::Endpoint{"127.0.0.1", dead_port()};
    cfg.connect_timeout = std::chrono::milliseconds(500);

    cfg.policy = EdgePolicy::kRemoteOnly;
    try {
      EdgeRuntime rt(cfg, nullptr, [](const EdgeEvent&) {});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConnectFailed);
    }

    cfg.policy = EdgePolicy::kHybrid;
    Recorder rec;
    EdgeRuntime rt(cfg, testing::small_model(), rec.sink());
    CHECK(!rt.remote_connected());
    rt.process_clip(three_words());
    rt.finish();
    CHECK(rec.of(EventKind::kKeyword).size() == 3);
    const auto errors = rec.of(EventKind::kError);
    REQUIRE(errors.size() == 3);
    for (const auto& e : errors) CHECK(e.code == std::optional<std::uint16_t>(1003));
  }
}

}  // namespace
}  // namespace hasr
