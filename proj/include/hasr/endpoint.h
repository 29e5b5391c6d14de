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

#ifndef HASR_ENDPOINT_H_
#define HASR_ENDPOINT_H_

#include <cstddef>
#include <optional>
#include <vector>

#include "hasr/audio.h"

namespace hasr {

struct EndpointConfig {
  std::size_t frame_len = 400;
  std::size_t hop = 160;
  double threshold_ratio = 4.0;  // multiple of the noise floor
  double min_speech_ms = 100.0;
  double hangover_ms = 300.0;
  double pad_ms = 100.0;

  void validate() const;
};

// [start_sample, end_sample)
struct Segment {
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;
  double peak_energy = 0.0;

  std::size_t size() const { return end_sample - start_sample; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

struct SegmentScan {
  std::vector<Segment> closed;  // ended by the hangover rule
  // Speech still running at the end of the buffer (start already padded).
  std::optional<Segment> open;
};

// Energy endpointing. Frame energy is the mean square over frame_len; the
// noise floor is the median of the first ten frame energies (at least 1e-8).
// Speech starts after min_speech_ms of consecutive frames above
// floor * threshold_ratio and ends after hangover_ms below it; segments are
// then padded by pad_ms on both sides and clamped to the clip.
// A given `noise_floor` replaces the estimate, which lets a stream be scanned
// in pieces against the floor measured at its start.
SegmentScan scan_segments(const AudioClip& clip, const EndpointConfig& cfg = {},
                          std::optional<double> noise_floor = std::nullopt);

// The floor estimate used by scan_segments. Throws kClipTooShort.
double estimate_noise_floor(const AudioClip& clip, const EndpointConfig& cfg = {});

// Closed segments plus any open one closed at the end of the clip.
std::vector<Segment> segment(const AudioClip& clip, const EndpointConfig& cfg = {});

std::vector<double> frame_energies(const AudioClip& clip, const EndpointConfig& cfg);

}  // namespace hasr

#endif  // HASR_ENDPOINT_H_
