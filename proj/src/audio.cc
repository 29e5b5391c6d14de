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

#include "hasr/audio.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

#include "hasr/error.h"

namespace hasr {
namespace {

namespace fs = std::filesystem;

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
  }
}

[[noreturn]] void unsupported(const std::string& what,
                              const std::optional<std::string>& source) {
  throw Error(ErrorCode::kUnsupportedFormat,
              (source ? *source + ": " : std::string()) + what);
}

}  // namespace

double sample_from_int16(std::int16_t v) { return v / 32768.0; }

std::int16_t sample_to_int16(double s) {
  double scaled = std::nearbyint(s * 32768.0);
  scaled = std::clamp(scaled, -32768.0, 32767.0);
  return static_cast<std::int16_t>(scaled);
}

std::vector<double> samples_from_pcm(std::span<const std::uint8_t> pcm_le) {
  std::vector<double> out(pcm_le.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = sample_from_int16(
        static_cast<std::int16_t>(le16(pcm_le.data() + 2 * i)));
  }
  return out;
}

std::vector<std::uint8_t> samples_to_pcm(std::span<const double> samples) {
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 2);
  for (double s : samples) put16(out, static_cast<std::uint16_t>(sample_to_int16(s)));
  return out;
}

AudioClip parse_wav(std::span<const std::uint8_t> bytes,
                    std::optional<std::string> source) {
  if (bytes.size() < 12 || !std::equal(bytes.begin(), bytes.begin() + 4, "RIFF") ||
      !std::equal(bytes.begin() + 8, bytes.begin() + 12, "WAVE")) {
    unsupported("not a RIFF/WAVE file", source);
  }
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::span<const std::uint8_t> data;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + pos;
    std::size_t size = le32(hdr + 4);
    std::size_t body = pos + 8;
    std::size_t avail = bytes.size() - body;
    if (std::equal(hdr, hdr + 4, "fmt ")) {
      if (size < 16 || size > avail) unsupported("truncated fmt chunk", source);
      format = le16(hdr + 8);
      channels = le16(hdr + 10);
      rate = le32(hdr + 12);
      bits = le16(hdr + 22);
      if (format == kFormatExtensible) {
        // WAVEFORMATEXTENSIBLE: the sub-format GUID starts at offset 24 of the
        // chunk body and its first two bytes carry the real format tag.
        if (size < 40) unsupported("truncated extensible fmt chunk", source);
        format = le16(hdr + 8 + 24);
      }
      have_fmt = true;
    } else if (std::equal(hdr, hdr + 4, "data")) {
      // Streaming writers leave the size field at its maximum; take what is
      // actually present.
      data = bytes.subspan(body, std::min(size, avail));
      have_data = true;
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) unsupported("missing fmt chunk", source);
  if (!have_data) unsupported("missing data chunk", source);
  if (format != kFormatPcm) {
    unsupported("encoding is not PCM (format tag " + std::to_string(format) + ")",
                source);
  }
  if (channels != 1) {
    unsupported("expected mono, found " + std::to_string(channels) + " channels",
                source);
  }
  if (bits != 16) {
    unsupported("expected 16-bit samples, found " + std::to_string(bits) + "-bit",
                source);
  }
  if (rate != kSampleRate) {
    unsupported("expected sample rate 16000 Hz, found " + std::to_string(rate) +
                    " Hz",
                source);
  }

  AudioClip clip;
  clip.samples = samples_from_pcm(data.first(data.size() & ~std::size_t{1}));
  clip.sample_rate = kSampleRate;
  clip.source_path = std::move(source);
  return clip;
}

AudioClip read_wav(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_wav(bytes, path.string());
}

void write_wav(const fs::path& path, std::span<const std::int16_t> pcm,
               int sample_rate) {
  std::vector<std::uint8_t> out;
  const auto data_bytes = static_cast<std::uint32_t>(pcm.size() * 2);
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, data_bytes);
  for (std::int16_t s : pcm) put16(out, static_cast<std::uint16_t>(s));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

void write_wav(const fs::path& path, const AudioClip& clip) {
  std::vector<std::int16_t> pcm(clip.samples.size());
  std::transform(clip.samples.begin(), clip.samples.end(), pcm.begin(),
                 sample_to_int16);
  write_wav(path, pcm, clip.sample_rate);
}

Split split_for_position(std::size_t position_in_word) {
  return position_in_word % 5 == 4 ? Split::kTest : Split::kTrain;
}

std::vector<DatasetEntry> DatasetIndex::select(Split split) const {
  std::vector<DatasetEntry> out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out),
               [split](const DatasetEntry& e) { return e.split == split; });
  return out;
}

DatasetIndex scan_dataset(const fs::path& root,
                          const std::vector<std::string>& words) {
  DatasetIndex index;
  for (const auto& word : words) {
    fs::path dir = root / word;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
      throw Error(ErrorCode::kMissingWordDirectory,
                  "missing word directory for \"" + word + "\": " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& item : fs::directory_iterator(dir)) {
      if (item.is_regular_file() && item.path().extension() == ".wav") {
        files.push_back(item.path());
      }
    }
    if (files.empty()) {
      throw Error(ErrorCode::kEmptyWordDirectory,
                  "no .wav files for \"" + word + "\" in " + dir.string());
    }
    std::sort(files.begin(), files.end());
    for (std::size_t i = 0; i < files.size(); ++i) {
      index.entries.push_back({word, files[i], split_for_position(i)});
    }
  }
  std::sort(index.entries.begin(), index.entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) {
              return a.path < b.path;
            });
  return index;
}

}  // namespace hasr
