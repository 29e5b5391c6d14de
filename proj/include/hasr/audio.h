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

#ifndef HASR_AUDIO_H_
#define HASR_AUDIO_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hasr {

inline constexpr int kSampleRate = 16000;

// Mono PCM normalized to [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kSampleRate;
  std::optional<std::string> source_path;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

enum class Split { kTrain, kTest };

struct DatasetEntry {
  std::string label;
  std::filesystem::path path;
  Split split = Split::kTrain;

  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

struct DatasetIndex {
  std::vector<DatasetEntry> entries;

  std::vector<DatasetEntry> select(Split split) const;
  friend bool operator==(const DatasetIndex&, const DatasetIndex&) = default;
};

// int16 <-> normalized sample conversion. to_int16 rounds to nearest and
// saturates, so from_int16 followed by to_int16 is the identity.
double sample_from_int16(std::int16_t v);
std::int16_t sample_to_int16(double s);

std::vector<double> samples_from_pcm(std::span<const std::uint8_t> pcm_le);
std::vector<std::uint8_t> samples_to_pcm(std::span<const double> samples);

// Reads a RIFF/WAVE file. Only 16 kHz mono 16-bit PCM is accepted; anything
// else raises kUnsupportedFormat naming the offending property.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip parse_wav(std::span<const std::uint8_t> bytes,
                    std::optional<std::string> source = std::nullopt);

void write_wav(const std::filesystem::path& path,
               std::span<const std::int16_t> pcm, int sample_rate = kSampleRate);
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

// Index of `root/<word>/*.wav`. Within each word the files are sorted by path
// and every fifth one (positions 4, 9, 14, ...) goes to the test split.
DatasetIndex scan_dataset(const std::filesystem::path& root,
                          const std::vector<std::string>& words);

Split split_for_position(std::size_t position_in_word);

}  // namespace hasr

#endif  // HASR_AUDIO_H_
