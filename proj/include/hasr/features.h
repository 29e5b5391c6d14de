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

#ifndef HASR_FEATURES_H_
#define HASR_FEATURES_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hasr/audio.h"
#include "hasr/matrix.h"

namespace hasr {

struct FeatureConfig {
  std::size_t frame_len = 400;  // 25 ms
  std::size_t hop = 160;        // 10 ms
  std::size_t fft_size = 512;
  std::size_t n_mel = 26;
  std::size_t n_ceps = 13;
  double preemphasis = 0.97;
  bool cmn = true;
  double log_floor = 1e-10;

  // Throws kInvalidConfig on the first violated constraint.
  void validate() const;

  // Short stable identifier (16 hex chars) of every field above.
  std::string hash() const;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

struct FeatureMatrix {
  Matrix frames;  // T x n_ceps
  double frame_rate = 100.0;
  std::string config_hash;

  std::size_t num_frames() const { return frames.rows(); }
  std::size_t dim() const { return frames.cols(); }
};

// Number of frames for a signal of `n` samples; 0 when n < frame_len.
std::size_t num_frames(std::size_t n, const FeatureConfig& cfg);

// Triangular mel filterbank (n_mel x fft_size/2+1). Filter edges are equally
// spaced on the mel scale from 0 Hz to sample_rate/2.
Matrix mel_filterbank(const FeatureConfig& cfg, int sample_rate = kSampleRate);

// Centre frequency in Hz of each mel filter.
std::vector<double> mel_centers(const FeatureConfig& cfg,
                                int sample_rate = kSampleRate);

// |X[k]|^2 for k = 0..fft_size/2 of the zero-padded input.
std::vector<double> power_spectrum(std::span<const double> frame,
                                   std::size_t fft_size);

// Per-frame mel filterbank energies before the log (T x n_mel).
Matrix filterbank_energies(const AudioClip& clip, const FeatureConfig& cfg);

FeatureMatrix mfcc(const AudioClip& clip, const FeatureConfig& cfg = {});

// Subtracts each column's mean. A column of identical values becomes exactly
// zero.
FeatureMatrix cmn(FeatureMatrix fm);

}  // namespace hasr

#endif  // HASR_FEATURES_H_
