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

#include "hasr/synth.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "hasr/error.h"
#include "hasr/random.h"

namespace hasr {
namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Distinct streams per (seed, word, clip) without correlated seeds.
std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

WordTemplate word_template(const std::string& word) {
  Rng rng(fnv1a(word));
  WordTemplate t;
  for (int i = 0; i < 3; ++i) {
    t.segments.push_back({rng.uniform(300.0, 1000.0), rng.uniform(1100.0, 3200.0),
                          rng.uniform(0.12, 0.22)});
  }
  return t;
}

AudioClip synth_word_clip(const std::string& word, std::uint64_t seed,
                          std::size_t clip_index, const SynthOptions& opts) {
  const WordTemplate tmpl = word_template(word);
  Rng rng(mix(mix(seed, fnv1a(word)), clip_index));
  const double sr = kSampleRate;
  const double tempo = rng.uniform(0.85, 1.15);
  const double pitch = rng.uniform(0.94, 1.06);
  const double level = rng.uniform(opts.level_min, opts.level_max);
  const double noise = rng.uniform(opts.noise_min, opts.noise_max);

  // Per-segment breakpoints; frequencies glide linearly between segment
  // centres so the tones stay phase-continuous.
  struct Point {
    double time, f1, f2;
  };
  std::vector<Point> points;
  double total = 0.0;
  for (const auto& seg : tmpl.segments) {
    const double d = seg.duration_s * tempo * rng.uniform(0.9, 1.1);
    points.push_back({total + d / 2, seg.f1 * pitch * rng.uniform(0.97, 1.03),
                      seg.f2 * pitch * rng.uniform(0.97, 1.03)});
    total += d;
  }
  const std::size_t word_len = static_cast<std::size_t>(total * sr);
  if (word_len >= opts.clip_samples) {
    throw Error(ErrorCode::kInvalidConfig, "synthetic word longer than clip");
  }
  const std::size_t onset = rng.index(opts.clip_samples - word_len);

  AudioClip clip;
  clip.samples.assign(opts.clip_samples, 0.0);
  for (double& s : clip.samples) s = noise * rng.normal();

  const double ramp = 0.01 * sr;
  double ph1 = rng.uniform(0.0, 2 * std::numbers::pi);
  double ph2 = rng.uniform(0.0, 2 * std::numbers::pi);
  for (std::size_t n = 0; n < word_len; ++n) {
    const double t = n / sr;
    double f1 = points.front().f1, f2 = points.front().f2;
    if (t >= points.back().time) {
      f1 = points.back().f1;
      f2 = points.back().f2;
    } else {
      for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        if (t >= points[i].time && t < points[i + 1].time) {
          const double u = (t - points[i].time) / (points[i + 1].time - points[i].time);
          f1 = points[i].f1 + u * (points[i + 1].f1 - points[i].f1);
          f2 = points[i].f2 + u * (points[i + 1].f2 - points[i].f2);
        }
      }
    }
    ph1 += 2 * std::numbers::pi * f1 / sr;
    ph2 += 2 * std::numbers::pi * f2 / sr;
    double env = 1.0;
    const double from_end = static_cast<double>(word_len - n);
    if (n < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * n / ramp);
    if (from_end < ramp) env = std::min(env, 0.5 - 0.5 * std::cos(std::numbers::pi * from_end / ramp));
    clip.samples[onset + n] += level * env * (std::sin(ph1) + 0.5 * std::sin(ph2)) / 1.5;
  }
  for (double& s : clip.samples) s = std::clamp(s, -1.0, 32767.0 / 32768.0);
  return clip;
}

AudioClip synth_silence(std::size_t n_samples, double noise_std, std::uint64_t seed) {
  Rng rng(seed);
  AudioClip clip;
  clip.samples.resize(n_samples);
  for (double& s : clip.samples) s = std::clamp(noise_std * rng.normal(), -1.0, 1.0);
  return clip;
}

void write_synthetic_dataset(const std::filesystem::path& root,
                             const std::vector<std::string>& words,
                             std::size_t clips_per_word, std::uint64_t seed,
                             const SynthOptions& opts) {
  for (const auto& word : words) {
    const auto dir = root / word;
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < clips_per_word; ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "_%04zu.wav", i);
      write_wav(dir / (word + name), synth_word_clip(word, seed, i, opts));
    }
  }
}

}  // namespace hasr
