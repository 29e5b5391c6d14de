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

#include "hasr/endpoint.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "hasr/error.h"

namespace hasr {
namespace {

constexpr std::size_t kNoiseFrames = 10;
constexpr double kMinNoiseFloor = 1e-8;

std::size_t ms_to_frames(double ms, std::size_t hop) {
  return static_cast<std::size_t>(std::ceil(ms * kSampleRate / 1000.0 / hop));
}

std::size_t ms_to_samples(double ms) {
  return static_cast<std::size_t>(std::llround(ms * kSampleRate / 1000.0));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

void EndpointConfig::validate() const {
  if (frame_len == 0 || hop == 0 || !(threshold_ratio > 0) ||
      !(min_speech_ms > 0) || !(hangover_ms > 0) || !(pad_ms > 0)) {
    throw Error(ErrorCode::kInvalidConfig, "endpoint config values must be positive");
  }
}

std::vector<double> frame_energies(const AudioClip& clip, const EndpointConfig& cfg) {
  const std::size_t n = clip.samples.size();
  if (n < cfg.frame_len) return {};
  const std::size_t t_frames = 1 + (n - cfg.frame_len) / cfg.hop;
  std::vector<double> e(t_frames);
  for (std::size_t t = 0; t < t_frames; ++t) {
    double s = 0.0;
    const double* x = clip.samples.data() + t * cfg.hop;
    for (std::size_t i = 0; i < cfg.frame_len; ++i) s += x[i] * x[i];
    e[t] = s / static_cast<double>(cfg.frame_len);
  }
  return e;
}

double estimate_noise_floor(const AudioClip& clip, const EndpointConfig& cfg) {
  cfg.validate();
  const auto energy = frame_energies(clip, cfg);
  if (energy.size() < kNoiseFrames) {
    throw Error(ErrorCode::kClipTooShort,
                "endpointing needs at least " + std::to_string(kNoiseFrames) +
                    " frames, clip has " + std::to_string(energy.size()));
  }
  return std::max(kMinNoiseFloor, median({energy.begin(), energy.begin() + kNoiseFrames}));
}

SegmentScan scan_segments(const AudioClip& clip, const EndpointConfig& cfg,
                          std::optional<double> noise_floor) {
  cfg.validate();
  const double floor = noise_floor ? *noise_floor : estimate_noise_floor(clip, cfg);
  const auto energy = frame_energies(clip, cfg);
  const double threshold = floor * cfg.threshold_ratio;
  const std::size_t min_frames = std::max<std::size_t>(1, ms_to_frames(cfg.min_speech_ms, cfg.hop));
  const std::size_t hang_frames = std::max<std::size_t>(1, ms_to_frames(cfg.hangover_ms, cfg.hop));
  const std::size_t pad = ms_to_samples(cfg.pad_ms);
  const std::size_t n = clip.samples.size();

  SegmentScan scan;
  auto make = [&](std::size_t first, std::size_t last, double peak) {
    Segment s;
    const std::size_t begin = first * cfg.hop;
    const std::size_t end = last * cfg.hop + cfg.frame_len;
    s.start_sample = begin > pad ? begin - pad : 0;
    s.end_sample = std::min(n, end + pad);
    if (!scan.closed.empty()) {
      s.start_sample = std::max(s.start_sample, scan.closed.back().end_sample);
    }
    s.peak_energy = peak;
    return s;
  };

  bool in_speech = false;
  std::size_t run_start = 0, run_len = 0;
  double run_peak = 0.0;
  std::size_t seg_first = 0, last_active = 0, silent = 0;
  double peak = 0.0;
  for (std::size_t t = 0; t < energy.size(); ++t) {
    const bool active = energy[t] > threshold;
    if (!in_speech) {
      if (!active) {
        run_len = 0;
        continue;
      }
      if (run_len == 0) {
        run_start = t;
        run_peak = 0.0;
      }
      ++run_len;
      run_peak = std::max(run_peak, energy[t]);
      if (run_len >= min_frames) {
        in_speech = true;
        seg_first = run_start;
        last_active = t;
        silent = 0;
        peak = run_peak;
      }
    } else if (active) {
      last_active = t;
      silent = 0;
      peak = std::max(peak, energy[t]);
    } else if (++silent >= hang_frames) {
      scan.closed.push_back(make(seg_first, last_active, peak));
      in_speech = false;
      run_len = 0;
    }
  }
  if (in_speech) scan.open = make(seg_first, last_active, peak);
  return scan;
}

std::vector<Segment> segment(const AudioClip& clip, const EndpointConfig& cfg) {
  SegmentScan scan = scan_segments(clip, cfg);
  if (scan.open) scan.closed.push_back(*scan.open);
  return scan.closed;
}

}  // namespace hasr
