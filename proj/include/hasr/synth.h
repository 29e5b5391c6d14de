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

#ifndef HASR_SYNTH_H_
#define HASR_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hasr/audio.h"

namespace hasr {

// Seeded tone-and-noise surrogates for spoken words, used when no recorded
// keyword corpus is at hand. Each word maps (by a hash of its text) to a
// fixed sequence of two-formant tone segments; every clip perturbs tempo,
// pitch, level, onset and background noise.
struct SynthOptions {
  std::size_t clip_samples = kSampleRate;  // 1 s
  double noise_min = 0.002;                // white-noise std range
  double noise_max = 0.015;
  double level_min = 0.15;  // peak tone amplitude range
  double level_max = 0.5;
};

struct WordTemplate {
  struct Segment {
    double f1, f2;       // Hz
    double duration_s;
  };
  std::vector<Segment> segments;
};

WordTemplate word_template(const std::string& word);

AudioClip synth_word_clip(const std::string& word, std::uint64_t seed,
                          std::size_t clip_index, const SynthOptions& opts = {});

// Background noise only.
AudioClip synth_silence(std::size_t n_samples, double noise_std, std::uint64_t seed);

// Writes root/<word>/<word>_NNNN.wav for every word.
void write_synthetic_dataset(const std::filesystem::path& root,
                             const std::vector<std::string>& words,
                             std::size_t clips_per_word, std::uint64_t seed,
                             const SynthOptions& opts = {});

}  // namespace hasr

#endif  // HASR_SYNTH_H_
