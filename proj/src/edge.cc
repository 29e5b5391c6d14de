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

#include "hasr/edge.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "hasr/error.h"

namespace hasr {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

}  // namespace

std::string_view policy_name(EdgePolicy p) {
  switch (p) {
    case EdgePolicy::kLocalOnly: return "local";
    case EdgePolicy::kRemoteOnly: return "remote";
    case EdgePolicy::kHybrid: return "hybrid";
  }
  return "?";
}

std::optional<EdgePolicy> parse_policy(std::string_view text) {
  if (text == "local") return EdgePolicy::kLocalOnly;
  if (text == "remote") return EdgePolicy::kRemoteOnly;
  if (text == "hybrid") return EdgePolicy::kHybrid;
  return std::nullopt;
}

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::kKeyword: return "Keyword";
    case EventKind::kTranscript: return "Transcript";
    case EventKind::kRejected: return "Rejected";
    case EventKind::kError: return "Error";
  }
  return "?";
}

std::string event_to_json(const EdgeEvent& e) {
  nlohmann::ordered_json j;
  j["kind"] = event_kind_name(e.kind);
  j["utt_id"] = e.utt_id;
  switch (e.kind) {
    case EventKind::kKeyword: j["word"] = e.text; break;
    case EventKind::kRejected: j["word"] = nullptr; break;
    default: j["text"] = e.text; break;
  }
  j["score"] = e.score ? nlohmann::ordered_json(*e.score) : nullptr;
  j["compute_ms"] = e.compute_ms ? nlohmann::ordered_json(*e.compute_ms) : nullptr;
  j["wall_ms_since_utt_end"] = e.wall_ms_since_utt_end;
  if (e.kind == EventKind::kError) {
    j["code"] = e.code ? nlohmann::ordered_json(*e.code) : nullptr;
  }
  return j.dump();
}

struct EdgeRuntime::Link {
  Link(net::TcpStream s, std::size_t capacity)
      : stream(std::move(s)),
        segments(std::numeric_limits<std::size_t>::max()),
        outbound(capacity) {}

  net::MessageStream stream;
  net::BoundedQueue<PendingSegment> segments;
  net::BoundedQueue<wire::Message> outbound;
  std::atomic<bool> stop{false};
  std::thread forwarder, sender, receiver;
};

EdgeRuntime::EdgeRuntime(EdgeConfig cfg, std::shared_ptr<const WordModelSet> model, Sink sink)
    : cfg_(std::move(cfg)), model_(std::move(model)), sink_(std::move(sink)) {
  cfg_.endpoint.validate();
  if (local() && !model_) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("policy ") + std::string(policy_name(cfg_.policy)) +
                    " needs a model");
  }
  if (remote() && !cfg_.server) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("policy ") + std::string(policy_name(cfg_.policy)) +
                    " needs a server address");
  }
  if (cfg_.queue_capacity == 0 || cfg_.chunk_bytes < 2) {
    throw Error(ErrorCode::kInvalidConfig, "queue capacity and chunk size must be positive");
  }
  if (!remote()) return;
  try {
    connect();
  } catch (const Error&) {
    if (cfg_.policy == EdgePolicy::kRemoteOnly) throw;
    link_.reset();
    link_dead_ = true;
  }
}

EdgeRuntime::~EdgeRuntime() {
  if (link_) {
    link_->stop = true;
    link_->segments.close();
    link_->outbound.close();
    link_->stream.stream().shutdown();
    stop_link();
  }
}

void EdgeRuntime::connect() {
  auto stream = net::TcpStream::connect(*cfg_.server, cfg_.connect_timeout);
  auto link = std::make_unique<Link>(std::move(stream), cfg_.queue_capacity);
  const std::string where = cfg_.server->to_string();
  try {
    link->stream.send(wire::Hello{});
    const auto r = link->stream.receive(cfg_.connect_timeout);
    if (r.status != net::MessageStream::Status::kMessage) {
      throw Error(ErrorCode::kConnectFailed, "no HelloAck from " + where);
    }
    const auto* ack = std::get_if<wire::HelloAck>(&r.message);
    if (ack == nullptr || ack->accepted != 1) {
      throw Error(ErrorCode::kConnectFailed, "server at " + where + " refused the session");
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConnectFailed) throw;
    throw Error(ErrorCode::kConnectFailed, "handshake with " + where + " failed: " + e.what());
  }
  link_ = std::move(link);
  link_->forwarder = std::thread(&EdgeRuntime::forwarder_loop, this);
  link_->sender = std::thread(&EdgeRuntime::sender_loop, this);
  link_->receiver = std::thread(&EdgeRuntime::receiver_loop, this);
}

void EdgeRuntime::emit(const EdgeEvent& e) {
  std::lock_guard<std::mutex> lock(emit_mu_);
  sink_(e);
}

void EdgeRuntime::process_clip(const AudioClip& clip) {
  if (finished_) throw Error(ErrorCode::kInvalidConfig, "runtime already finished");
  const auto segments = segment(clip, cfg_.endpoint);
  for (const Segment& s : segments) {
    handle_segment(std::span<const double>(clip.samples).subspan(s.start_sample, s.size()));
  }
}

void EdgeRuntime::feed(std::span<const double> samples) {
  if (finished_) throw Error(ErrorCode::kInvalidConfig, "runtime already finished");
  stream_.samples.insert(stream_.samples.end(), samples.begin(), samples.end());
  const auto& ep = cfg_.endpoint;
  if (!noise_floor_) {
    if (stream_.samples.size() < ep.frame_len + 9 * ep.hop) return;
    noise_floor_ = estimate_noise_floor(stream_, ep);
  }
  const SegmentScan scan = scan_segments(stream_, ep, noise_floor_);
  std::size_t cut = 0;
  for (const Segment& s : scan.closed) {
    const std::size_t start = std::max(base_ + s.start_sample, last_end_);
    const std::size_t end = base_ + s.end_sample;
    if (end <= start) continue;
    handle_segment(std::span<const double>(stream_.samples).subspan(start - base_, end - start));
    last_end_ = end;
    cut = s.end_sample;
  }
  if (scan.closed.empty() && !scan.open) {
    // Keep enough tail for a run that has not reached min_speech yet.
    const std::size_t min_frames =
        static_cast<std::size_t>(std::ceil(ep.min_speech_ms * kSampleRate / 1000.0 / ep.hop));
    const std::size_t pad = static_cast<std::size_t>(std::llround(ep.pad_ms * kSampleRate / 1000.0));
    const std::size_t keep = pad + (min_frames + 1) * ep.hop + ep.frame_len;
    if (stream_.samples.size() > keep) cut = stream_.samples.size() - keep;
  }
  cut -= cut % ep.hop;
  if (cut > 0) {
    stream_.samples.erase(stream_.samples.begin(),
                          stream_.samples.begin() + static_cast<std::ptrdiff_t>(cut));
    base_ += cut;
  }
}

void EdgeRuntime::finish() {
  if (finished_) return;
  finished_ = true;

  const auto& ep = cfg_.endpoint;
  if (noise_floor_ || stream_.samples.size() >= ep.frame_len + 9 * ep.hop) {
    if (!noise_floor_) noise_floor_ = estimate_noise_floor(stream_, ep);
    SegmentScan scan = scan_segments(stream_, ep, noise_floor_);
    if (scan.open) scan.closed.push_back(*scan.open);
    for (const Segment& s : scan.closed) {
      const std::size_t start = std::max(base_ + s.start_sample, last_end_);
      const std::size_t end = base_ + s.end_sample;
      if (end <= start) continue;
      handle_segment(std::span<const double>(stream_.samples).subspan(start - base_, end - start));
      last_end_ = end;
    }
  }
  stream_.samples.clear();

  if (!link_) return;
  link_->segments.close();
  if (link_->forwarder.joinable()) link_->forwarder.join();
  if (link_->sender.joinable()) link_->sender.join();
  {
    std::unique_lock<std::mutex> lock(pending_mu_);
    pending_cv_.wait_for(lock, cfg_.reply_timeout, [&] { return outstanding_.empty(); });
  }
  fail_outstanding("no reply from server within " +
                   std::to_string(cfg_.reply_timeout.count()) + " ms");
  link_->stop = true;
  stop_link();
}

void EdgeRuntime::stop_link() {
  for (std::thread* t : {&link_->forwarder, &link_->sender, &link_->receiver}) {
    if (t->joinable()) t->join();
  }
  link_->stream.stream().close();
}

void EdgeRuntime::handle_segment(std::span<const double> samples) {
  const auto utt_end = Clock::now();
  const std::uint32_t utt_id = next_utt_id_++;

  if (local()) {
    EdgeEvent e;
    e.utt_id = utt_id;
    const auto t0 = Clock::now();
    try {
      AudioClip clip;
      clip.samples.assign(samples.begin(), samples.end());
      const Recognition r = recognize(*model_, clip, cfg_.threshold);
      e.compute_ms = ms_since(t0);
      e.score = r.best_score;
      if (r.best_word) {
        e.kind = EventKind::kKeyword;
        e.text = *r.best_word;
      } else {
        e.kind = EventKind::kRejected;
      }
    } catch (const Error& err) {
      e.kind = EventKind::kError;
      e.compute_ms = ms_since(t0);
      e.text = err.what();
    }
    e.wall_ms_since_utt_end = ms_since(utt_end);
    emit(e);
  }

  if (!remote()) return;
  std::unique_lock<std::mutex> lock(pending_mu_);
  if (!link_ || link_dead_) {
    lock.unlock();
    EdgeEvent e;
    e.kind = EventKind::kError;
    e.utt_id = utt_id;
    e.text = "server unavailable";
    e.code = wire::kErrBackendFailure;
    e.wall_ms_since_utt_end = ms_since(utt_end);
    emit(e);
    return;
  }
  outstanding_[utt_id] = Outstanding{utt_end};
  lock.unlock();
  link_->segments.push(PendingSegment{utt_id, samples_to_pcm(samples)});
}

void EdgeRuntime::fail_outstanding(const std::string& reason) {
  std::lock_guard<std::mutex> lock(pending_mu_);
  if (outstanding_.empty()) return;
  link_dead_ = true;
  for (const auto& [utt_id, o] : outstanding_) {
    EdgeEvent e;
    e.kind = EventKind::kError;
    e.utt_id = utt_id;
    e.text = reason;
    e.code = wire::kErrBackendFailure;
    e.wall_ms_since_utt_end = ms_since(o.utt_end);
    emit(e);
  }
  outstanding_.clear();
  pending_cv_.notify_all();
}

void EdgeRuntime::forwarder_loop() {
  while (auto seg = link_->segments.pop()) {
    bool ok = link_->outbound.push(wire::UttStart{seg->utt_id});
    if (ok) {
      for (auto& chunk : wire::chunk_audio(seg->utt_id, seg->pcm, cfg_.chunk_bytes)) {
        if (!(ok = link_->outbound.push(std::move(chunk)))) break;
      }
    }
    if (ok) link_->outbound.push(wire::UttEnd{seg->utt_id});
  }
  link_->outbound.close();
}

void EdgeRuntime::sender_loop() {
  while (auto m = link_->outbound.pop()) {
    try {
      link_->stream.send(*m);
    } catch (const Error& e) {
      {
        std::lock_guard<std::mutex> lock(pending_mu_);
        link_dead_ = true;
      }
      fail_outstanding(std::string("send failed: ") + e.what());
      link_->outbound.close();
      link_->segments.close();
      return;
    }
  }
}

void EdgeRuntime::receiver_loop() {
  using Status = net::MessageStream::Status;
  for (;;) {
    net::MessageStream::Received r;
    try {
      r = link_->stream.receive(std::chrono::milliseconds(100));
    } catch (const Error& e) {
      r.status = Status::kClosed;
      r.detail = e.what();
    }
    if (r.status == Status::kTimeout) {
      if (link_->stop) return;
      continue;
    }
    if (r.status != Status::kMessage) {
      if (link_->stop) return;
      {
        std::lock_guard<std::mutex> lock(pending_mu_);
        link_dead_ = true;
      }
      fail_outstanding(r.status == Status::kProtocolError
                           ? "malformed reply from server: " + r.detail
                           : std::string("server closed the connection"));
      link_->outbound.close();
      link_->segments.close();
      return;
    }
    if (const auto* t = std::get_if<wire::Transcript>(&r.message)) {
      std::lock_guard<std::mutex> lock(pending_mu_);
      auto it = outstanding_.find(t->utt_id);
      if (it == outstanding_.end()) continue;
      EdgeEvent e;
      e.kind = EventKind::kTranscript;
      e.utt_id = t->utt_id;
      e.text = t->text;
      e.wall_ms_since_utt_end = ms_since(it->second.utt_end);
      outstanding_.erase(it);
      emit(e);
      pending_cv_.notify_all();
    } else if (const auto* err = std::get_if<wire::ErrorMsg>(&r.message)) {
      // Errors carry no utt_id; replies come back in UttEnd order, so this
      // one belongs to the oldest utterance still waiting.
      std::lock_guard<std::mutex> lock(pending_mu_);
      if (outstanding_.empty()) continue;
      auto it = outstanding_.begin();
      EdgeEvent e;
      e.kind = EventKind::kError;
      e.utt_id = it->first;
      e.text = err->message;
      e.code = err->code;
      e.wall_ms_since_utt_end = ms_since(it->second.utt_end);
      outstanding_.erase(it);
      emit(e);
      pending_cv_.notify_all();
    }
  }
}

}  // namespace hasr
