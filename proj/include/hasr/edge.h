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

#ifndef HASR_EDGE_H_
#define HASR_EDGE_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "hasr/audio.h"
#include "hasr/endpoint.h"
#include "hasr/net.h"
#include "hasr/recognizer.h"

namespace hasr {

enum class EdgePolicy { kLocalOnly, kRemoteOnly, kHybrid };

std::string_view policy_name(EdgePolicy p);
// "local" | "remote" | "hybrid"
std::optional<EdgePolicy> parse_policy(std::string_view text);

enum class EventKind { kKeyword, kTranscript, kRejected, kError };

std::string_view event_kind_name(EventKind k);

struct EdgeEvent {
  EventKind kind = EventKind::kKeyword;
  std::uint32_t utt_id = 0;
  // Keyword: the word. Transcript: the text. Error: the message.
  // Rejected: empty.
  std::string text;
  std::optional<double> score;       // per-frame log-likelihood
  std::optional<double> compute_ms;  // local decision time
  double wall_ms_since_utt_end = 0.0;
  std::optional<std::uint16_t> code;  // wire error code, Error only
};

// One line of JSON with keys in a fixed order:
// kind, utt_id, word|text, score, compute_ms, wall_ms_since_utt_end[, code].
std::string event_to_json(const EdgeEvent& e);

struct EdgeConfig {
  EdgePolicy policy = EdgePolicy::kLocalOnly;
  std::optional<net::Endpoint> server;
  EndpointConfig endpoint;
  std::optional<double> threshold;  // rejection threshold for local decisions
  std::size_t queue_capacity = 64;  // chunks between forwarder and sender
  std::size_t chunk_bytes = wire::kPreferredChunkBytes;
  std::chrono::milliseconds connect_timeout{2000};
  // How long finish() waits for outstanding transcripts.
  std::chrono::milliseconds reply_timeout{30000};
};

// Segments audio, decides keywords locally and forwards segments to the
// server. Events go to the sink from a single emitter, so a sink never runs
// concurrently with itself.
class EdgeRuntime {
 public:
  using Sink = std::function<void(const EdgeEvent&)>;

  // Connects to the server when the policy needs one. RemoteOnly throws
  // kConnectFailed if that fails; Hybrid carries on locally. Throws
  // kInvalidConfig when a needed model or address is missing.
  EdgeRuntime(EdgeConfig cfg, std::shared_ptr<const WordModelSet> model, Sink sink);
  ~EdgeRuntime();
  EdgeRuntime(const EdgeRuntime&) = delete;
  EdgeRuntime& operator=(const EdgeRuntime&) = delete;

  // Batch input: segments the whole clip, then handles each segment.
  void process_clip(const AudioClip& clip);

  // Streaming input. Segments are handled as soon as their hangover ends.
  void feed(std::span<const double> samples);
  // Closes any running segment, waits for outstanding transcripts and stops
  // the link. Idempotent.
  void finish();

  bool remote_connected() const { return link_ != nullptr && !link_dead_.load(); }
  // True once a link that was up failed (or never came up).
  bool remote_failed() const { return link_dead_.load(); }
  std::uint32_t utterances() const { return next_utt_id_ - 1; }

 private:
  struct PendingSegment {
    std::uint32_t utt_id = 0;
    std::vector<std::uint8_t> pcm;  // int16 little-endian
  };
  struct Outstanding {
    std::chrono::steady_clock::time_point utt_end;
  };
  struct Link;

  void handle_segment(std::span<const double> samples);
  void emit(const EdgeEvent& e);
  void connect();
  void forwarder_loop();
  void sender_loop();
  void receiver_loop();
  void fail_outstanding(const std::string& reason);
  void stop_link();
  bool local() const { return cfg_.policy != EdgePolicy::kRemoteOnly; }
  bool remote() const { return cfg_.policy != EdgePolicy::kLocalOnly; }

  EdgeConfig cfg_;
  std::shared_ptr<const WordModelSet> model_;
  Sink sink_;
  std::mutex emit_mu_;
  std::uint32_t next_utt_id_ = 1;
  bool finished_ = false;

  // Streaming state; samples before base_ are gone.
  AudioClip stream_;
  std::size_t base_ = 0;
  std::size_t last_end_ = 0;  // absolute end of the last handled segment
  std::optional<double> noise_floor_;

  std::unique_ptr<Link> link_;
  std::atomic<bool> link_dead_{false};
  std::mutex pending_mu_;
  std::condition_variable pending_cv_;
  std::map<std::uint32_t, Outstanding> outstanding_;
};

}  // namespace hasr

#endif  // HASR_EDGE_H_
