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

#include <cstring>
#include <fstream>

#include "doctest.h"
#include "hasr/audio.h"
#include "hasr/error.h"
#include "test_util.h"

namespace hasr {
namespace {

// Minimal canonical WAV writer, independent of the library.
std::vector<std::uint8_t> wav_bytes(std::uint16_t format, std::uint16_t channels,
                                    std::uint32_t rate, std::uint16_t bits,
                                    const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> out;
  auto str = [&](const char* s) { out.insert(out.end(), s, s + 4); };
  auto u16 = [&](std::uint16_t v) {
    out.push_back(v & 0xFF);
    out.push_back(v >> 8);
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
  };
  str("RIFF");
  u32(static_cast<std::uint32_t>(36 + data.size()));
  str("WAVE");
  str("fmt ");
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(bits);
  str("data");
  u32(static_cast<std::uint32_t>(data.size()));
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

void touch(const std::filesystem::path& p) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << "x";
}

TEST_SUITE("audio") {
  TEST_CASE("int16 mapping divides by 32768") {
    CHECK(sample_from_int16(-32768) == -1.0);
    CHECK(sample_from_int16(16384) == 0.5);
    CHECK(sample_from_int16(0) == 0.0);
    for (int v = -32768; v <= 32767; v += 7) {
      CHECK(sample_to_int16(sample_from_int16(static_cast<std::int16_t>(v))) == v);
    }
    CHECK(sample_to_int16(2.0) == 32767);
    CHECK(sample_to_int16(-2.0) == -32768);
  }

  TEST_CASE("160 zero samples read back as exact zeros") {
    const auto bytes = wav_bytes(1, 1, 16000, 16, std::vector<std::uint8_t>(320, 0));
    const AudioClip clip = parse_wav(bytes);
    REQUIRE(clip.size() == 160);
    CHECK(clip.sample_rate == 16000);
    for (double s : clip.samples) CHECK(s == 0.0);
  }

  TEST_CASE("write then read is lossless at int16") {
    testing::TempDir dir("audio");
    std::vector<std::int16_t> pcm(5000);
    for (std::size_t i = 0; i < pcm.size(); ++i) {
      pcm[i] = static_cast<std::int16_t>((static_cast<int>(i) * 7919) % 65536 - 32768);
    }
    write_wav(dir / "a.wav", pcm);
    const AudioClip clip = read_wav(dir / "a.wav");
    REQUIRE(clip.size() == pcm.size());
    for (std::size_t i = 0; i < pcm.size(); ++i) CHECK(sample_to_int16(clip.samples[i]) == pcm[i]);
  }

  TEST_CASE("unsupported formats name the property") {
    const std::vector<std::uint8_t> data(64, 0);
    auto message = [](const std::vector<std::uint8_t>& b) {
      try {
        parse_wav(b);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::kUnsupportedFormat);
        return std::string(e.what());
      }
      return std::string("no error");
    };
    CHECK(message(wav_bytes(1, 2, 16000, 16, data)).find("mono") != std::string::npos);
    CHECK(message(wav_bytes(1, 1, 8000, 16, data)).find("8000") != std::string::npos);
    CHECK(message(wav_bytes(1, 1, 16000, 8, data)).find("8-bit") != std::string::npos);
    CHECK(message(wav_bytes(3, 1, 16000, 16, data)).find("PCM") != std::string::npos);
    CHECK(message({'n', 'o', 'p', 'e'}).find("RIFF") != std::string::npos);
  }

  TEST_CASE("missing file is NotFound") {
    CHECK_THROWS_AS(read_wav("/nonexistent/x.wav"), Error);
  }

  TEST_CASE("scan_dataset enumerates word directories") {
    testing::TempDir dir("scan");
    touch(dir / "go/a.wav");
    touch(dir / "go/b.wav");
    touch(dir / "stop/c.wav");
    touch(dir / "stop/notes.txt");
    const DatasetIndex index = scan_dataset(dir.path(), {"go", "stop"});
    REQUIRE(index.entries.size() == 3);
    std::size_t go = 0, stop = 0;
    for (const auto& e : index.entries) (e.label == "go" ? go : stop)++;
    CHECK(go == 2);
    CHECK(stop == 1);
  }

  TEST_CASE("missing word directory names the word") {
    testing::TempDir dir("scan");
    touch(dir / "go/a.wav");
    try {
      scan_dataset(dir.path(), {"go", "start"});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kMissingWordDirectory);
      CHECK(std::string(e.what()).find("start") != std::string::npos);
    }
  }

  TEST_CASE("80/20 split by sorted position") {
    testing::TempDir dir("split");
    for (int i = 9; i >= 0; --i) touch(dir / ("w/clip" + std::to_string(i) + ".wav"));
    const DatasetIndex a = scan_dataset(dir.path(), {"w"});
    const DatasetIndex b = scan_dataset(dir.path(), {"w"});
    CHECK(a == b);
    CHECK(a.select(Split::kTrain).size() == 8);
    const auto test = a.select(Split::kTest);
    REQUIRE(test.size() == 2);
    // Sorted: clip0..clip9, so positions 4 and 9.
    CHECK(test[0].path.filename() == "clip4.wav");
    CHECK(test[1].path.filename() == "clip9.wav");
  }
}

}  // namespace
}  // namespace hasr
