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

#ifndef HASR_PROTOCOL_H_
#define HASR_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hasr::wire {

// Frame layout: [length: u32 BE][type: u8][payload]. `length` counts the type
// byte plus the payload. All multi-byte integers are big-endian.
inline constexpr std::size_t kHeaderSize = 4;
inline constexpr std::uint32_t kMaxFrameLength = 1u << 20;  // 1 MiB
inline constexpr std::uint8_t kProtoVersion = 1;
inline constexpr std::size_t kPreferredChunkBytes = 3200;  // 100 ms @ 16 kHz

enum class MessageType : std::uint8_t {
  kHello = 0x01,
  kHelloAck = 0x02,
  kUttStart = 0x10,
  kAudioChunk = 0x11,
  kUttEnd = 0x12,
  kTranscript = 0x20,
  kError = 0x30,
  kPing = 0x40,
  kPong = 0x41,
};

// Wire error codes carried by ErrorMsg.
enum ErrorCodes : std::uint16_t {
  kErrProtocolViolation = 1001,
  kErrUnsupportedAudio = 1002,
  kErrBackendFailure = 1003,
  kErrUnknownUtterance = 1004,
};

struct Hello {
  std::uint8_t proto_version = kProtoVersion;
  std::uint32_t sample_rate = 16000;
  std::uint8_t channels = 1;
  std::uint8_t bits = 16;
  std::uint8_t encoding = 0;  // PCM signed little-endian
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct HelloAck {
  std::uint8_t accepted = 1;
  std::uint8_t proto_version = kProtoVersion;
  friend bool operator==(const HelloAck&, const HelloAck&) = default;
};

struct UttStart {
  std::uint32_t utt_id = 0;
  friend bool operator==(const UttStart&, const UttStart&) = default;
};

struct AudioChunk {
  std::uint32_t utt_id = 0;
  std::uint32_t seq = 0;
  std::vector<std::uint8_t> pcm;  // int16 little-endian, even length
  friend bool operator==(const AudioChunk&, const AudioChunk&) = default;
};

struct UttEnd {
  std::uint32_t utt_id = 0;
  friend bool operator==(const UttEnd&, const UttEnd&) = default;
};

struct Transcript {
  std::uint32_t utt_id = 0;
  std::string text;  // UTF-8
  std::uint16_t confidence_bp = 0;  // 0..10000
  friend bool operator==(const Transcript&, const Transcript&) = default;
};

struct ErrorMsg {
  std::uint16_t code = 0;
  std::string message;  // UTF-8
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

struct Ping {
  friend bool operator==(const Ping&, const Ping&) = default;
};
struct Pong {
  friend bool operator==(const Pong&, const Pong&) = default;
};

using Message = std::variant<Hello, HelloAck, UttStart, AudioChunk, UttEnd,
                             Transcript, ErrorMsg, Ping, Pong>;

MessageType type_of(const Message& m);
std::string_view type_name(MessageType t);

bool valid_utf8(std::string_view s);

// Appends one frame to `out`. Throws hasr::Error with kOversizeFrame,
// kInvalidUtf8 or kInvalidMessage (odd PCM length, confidence > 10000).
void encode_into(const Message& m, std::vector<std::uint8_t>& out);
std::vector<std::uint8_t> encode(const Message& m);

enum class DecodeStatus { kMessage, kNeedMoreData, kProtocolError };

enum class ProtocolError {
  kNone,
  kUnknownType,
  kBadLength,
  kInvalidUtf8,
  kOversize,
  kBadValue,
};

std::string_view protocol_error_name(ProtocolError e);

struct DecodeResult {
  DecodeStatus status = DecodeStatus::kNeedMoreData;
  Message message;
  std::size_t consumed = 0;  // frame size; 0 unless status == kMessage
  ProtocolError error = ProtocolError::kNone;
  std::string detail;
};

// Decodes the first frame of `buffer`. Never reads past the declared frame
// length and never throws.
DecodeResult decode(std::span<const std::uint8_t> buffer);

// Splits `pcm` into AudioChunk messages of at most `chunk_bytes` bytes
// (rounded down to even), seq numbered from 0.
std::vector<AudioChunk> chunk_audio(std::uint32_t utt_id,
                                    std::span<const std::uint8_t> pcm,
                                    std::size_t chunk_bytes = kPreferredChunkBytes);

// Golden vectors: a JSON document of hex-encoded frames and their expected
// decode outcome, shared with other implementations of the protocol.
std::string golden_vectors_json();

std::string to_hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(std::string_view hex);

}  // namespace hasr::wire

#endif  // HASR_PROTOCOL_H_
