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

#include "hasr/protocol.h"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

#include "hasr/error.h"

namespace hasr::wire {
namespace {

using ojson = nlohmann::ordered_json;

void put_u8(std::vector<std::uint8_t>& out, std::uint8_t v) { out.push_back(v); }
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}
std::uint32_t get_u32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
}

struct PayloadWriter {
  std::vector<std::uint8_t>& out;

  void operator()(const Hello& m) {
    put_u8(out, m.proto_version);
    put_u32(out, m.sample_rate);
    put_u8(out, m.channels);
    put_u8(out, m.bits);
    put_u8(out, m.encoding);
  }
  void operator()(const HelloAck& m) {
    put_u8(out, m.accepted);
    put_u8(out, m.proto_version);
  }
  void operator()(const UttStart& m) { put_u32(out, m.utt_id); }
  void operator()(const AudioChunk& m) {
    if (m.pcm.size() % 2 != 0) {
      throw Error(ErrorCode::kInvalidMessage, "AudioChunk pcm length is odd");
    }
    put_u32(out, m.utt_id);
    put_u32(out, m.seq);
    out.insert(out.end(), m.pcm.begin(), m.pcm.end());
  }
  void operator()(const UttEnd& m) { put_u32(out, m.utt_id); }
  void operator()(const Transcript& m) {
    if (!valid_utf8(m.text)) {
      throw Error(ErrorCode::kInvalidUtf8, "Transcript text is not valid UTF-8");
    }
    if (m.confidence_bp > 10000) {
      throw Error(ErrorCode::kInvalidMessage, "confidence_bp exceeds 10000");
    }
    put_u32(out, m.utt_id);
    put_u32(out, static_cast<std::uint32_t>(m.text.size()));
    out.insert(out.end(), m.text.begin(), m.text.end());
    put_u16(out, m.confidence_bp);
  }
  void operator()(const ErrorMsg& m) {
    if (!valid_utf8(m.message)) {
      throw Error(ErrorCode::kInvalidUtf8, "Error message is not valid UTF-8");
    }
    put_u16(out, m.code);
    put_u32(out, static_cast<std::uint32_t>(m.message.size()));
    out.insert(out.end(), m.message.begin(), m.message.end());
  }
  void operator()(const Ping&) {}
  void operator()(const Pong&) {}
};

DecodeResult fail(ProtocolError e, std::string detail) {
  DecodeResult r;
  r.status = DecodeStatus::kProtocolError;
  r.error = e;
  r.detail = std::move(detail);
  return r;
}

DecodeResult ok(Message m, std::size_t consumed) {
  DecodeResult r;
  r.status = DecodeStatus::kMessage;
  r.message = std::move(m);
  r.consumed = consumed;
  return r;
}

DecodeResult bad_length(MessageType t, std::size_t got, const std::string& want) {
  return fail(ProtocolError::kBadLength,
              std::string(type_name(t)) + " payload is " + std::to_string(got) +
                  " bytes, expected " + want);
}

ojson message_json(const Message& m) {
  ojson j;
  j["type"] = std::string(type_name(type_of(m)));
  std::visit(
      [&j](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Hello>) {
          j["proto_version"] = v.proto_version;
          j["sample_rate"] = v.sample_rate;
          j["channels"] = v.channels;
          j["bits"] = v.bits;
          j["encoding"] = v.encoding;
        } else if constexpr (std::is_same_v<T, HelloAck>) {
          j["accepted"] = v.accepted;
          j["proto_version"] = v.proto_version;
        } else if constexpr (std::is_same_v<T, UttStart> || std::is_same_v<T, UttEnd>) {
          j["utt_id"] = v.utt_id;
        } else if constexpr (std::is_same_v<T, AudioChunk>) {
          j["utt_id"] = v.utt_id;
          j["seq"] = v.seq;
          j["pcm_hex"] = to_hex(v.pcm);
        } else if constexpr (std::is_same_v<T, Transcript>) {
          j["utt_id"] = v.utt_id;
          j["text"] = v.text;
          j["confidence_bp"] = v.confidence_bp;
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          j["code"] = v.code;
          j["message"] = v.message;
        }
      },
      m);
  return j;
}

}  // namespace

MessageType type_of(const Message& m) {
  static constexpr MessageType kTypes[] = {
      MessageType::kHello,      MessageType::kHelloAck, MessageType::kUttStart,
      MessageType::kAudioChunk, MessageType::kUttEnd,   MessageType::kTranscript,
      MessageType::kError,      MessageType::kPing,     MessageType::kPong};
  return kTypes[m.index()];
}

std::string_view type_name(MessageType t) {
  switch (t) {
    case MessageType::kHello: return "Hello";
    case MessageType::kHelloAck: return "HelloAck";
    case MessageType::kUttStart: return "UttStart";
    case MessageType::kAudioChunk: return "AudioChunk";
    case MessageType::kUttEnd: return "UttEnd";
    case MessageType::kTranscript: return "Transcript";
    case MessageType::kError: return "Error";
    case MessageType::kPing: return "Ping";
    case MessageType::kPong: return "Pong";
  }
  return "Unknown";
}

std::string_view protocol_error_name(ProtocolError e) {
  switch (e) {
    case ProtocolError::kNone: return "None";
    case ProtocolError::kUnknownType: return "UnknownType";
    case ProtocolError::kBadLength: return "BadLength";
    case ProtocolError::kInvalidUtf8: return "InvalidUtf8";
    case ProtocolError::kOversize: return "Oversize";
    case ProtocolError::kBadValue: return "BadValue";
  }
  return "Unknown";
}

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len;
    std::uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlong forms, surrogates, and values beyond U+10FFFF.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
        (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += len;
  }
  return true;
}

void encode_into(const Message& m, std::vector<std::uint8_t>& out) {
  std::vector<std::uint8_t> payload;
  std::visit(PayloadWriter{payload}, m);
  const std::size_t length = 1 + payload.size();
  if (length > kMaxFrameLength) {
    throw Error(ErrorCode::kOversizeFrame,
                "frame length " + std::to_string(length) + " exceeds " +
                    std::to_string(kMaxFrameLength));
  }
  put_u32(out, static_cast<std::uint32_t>(length));
  put_u8(out, static_cast<std::uint8_t>(type_of(m)));
  out.insert(out.end(), payload.begin(), payload.end());
}

std::vector<std::uint8_t> encode(const Message& m) {
  std::vector<std::uint8_t> out;
  encode_into(m, out);
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> buffer) {
  if (buffer.size() < kHeaderSize) return {};
  const std::uint32_t length = get_u32(buffer.data());
  if (length == 0) {
    return fail(ProtocolError::kBadLength, "frame length 0 leaves no type byte");
  }
  if (length > kMaxFrameLength) {
    return fail(ProtocolError::kOversize, "frame length " + std::to_string(length) +
                                              " exceeds " +
                                              std::to_string(kMaxFrameLength));
  }
  if (buffer.size() < kHeaderSize + length) return {};

  const std::size_t frame_size = kHeaderSize + length;
  const std::uint8_t type_byte = buffer[kHeaderSize];
  const std::uint8_t* p = buffer.data() + kHeaderSize + 1;
  const std::size_t n = length - 1;
  const auto type = static_cast<MessageType>(type_byte);

  switch (type) {
    case MessageType::kHello:
      if (n != 8) return bad_length(type, n, "8");
      return ok(Hello{p[0], get_u32(p + 1), p[5], p[6], p[7]}, frame_size);
    case MessageType::kHelloAck:
      if (n != 2) return bad_length(type, n, "2");
      return ok(HelloAck{p[0], p[1]}, frame_size);
    case MessageType::kUttStart:
      if (n != 4) return bad_length(type, n, "4");
      return ok(UttStart{get_u32(p)}, frame_size);
    case MessageType::kUttEnd:
      if (n != 4) return bad_length(type, n, "4");
      return ok(UttEnd{get_u32(p)}, frame_size);
    case MessageType::kAudioChunk: {
      if (n < 8) return bad_length(type, n, "at least 8");
      if ((n - 8) % 2 != 0) {
        return fail(ProtocolError::kBadLength,
                    "AudioChunk pcm length " + std::to_string(n - 8) + " is odd");
      }
      return ok(AudioChunk{get_u32(p), get_u32(p + 4), {p + 8, p + n}}, frame_size);
    }
    case MessageType::kTranscript: {
      if (n < 10) return bad_length(type, n, "at least 10");
      const std::uint64_t text_len = get_u32(p + 4);
      if (10 + text_len != n) {
        return bad_length(type, n, std::to_string(10 + text_len) + " for text_len " +
                                       std::to_string(text_len));
      }
      std::string text(reinterpret_cast<const char*>(p + 8), text_len);
      if (!valid_utf8(text)) {
        return fail(ProtocolError::kInvalidUtf8, "Transcript text is not valid UTF-8");
      }
      const std::uint16_t conf = get_u16(p + 8 + text_len);
      if (conf > 10000) {
        return fail(ProtocolError::kBadValue,
                    "Transcript confidence_bp " + std::to_string(conf) + " exceeds 10000");
      }
      return ok(Transcript{get_u32(p), std::move(text), conf}, frame_size);
    }
    case MessageType::kError: {
      if (n < 6) return bad_length(type, n, "at least 6");
      const std::uint64_t msg_len = get_u32(p + 2);
      if (6 + msg_len != n) {
        return bad_length(type, n, std::to_string(6 + msg_len) + " for msg_len " +
                                       std::to_string(msg_len));
      }
      std::string msg(reinterpret_cast<const char*>(p + 6), msg_len);
      if (!valid_utf8(msg)) {
        return fail(ProtocolError::kInvalidUtf8, "Error message is not valid UTF-8");
      }
      return ok(ErrorMsg{get_u16(p), std::move(msg)}, frame_size);
    }
    case MessageType::kPing:
      if (n != 0) return bad_length(type, n, "0");
      return ok(Ping{}, frame_size);
    case MessageType::kPong:
      if (n != 0) return bad_length(type, n, "0");
      return ok(Pong{}, frame_size);
  }
  char hex[8];
  std::snprintf(hex, sizeof hex, "0x%02X", type_byte);
  return fail(ProtocolError::kUnknownType, std::string("unknown message type ") + hex);
}

std::vector<AudioChunk> chunk_audio(std::uint32_t utt_id,
                                    std::span<const std::uint8_t> pcm,
                                    std::size_t chunk_bytes) {
  chunk_bytes = std::max<std::size_t>(2, chunk_bytes & ~std::size_t{1});
  std::vector<AudioChunk> out;
  std::uint32_t seq = 0;
  for (std::size_t off = 0; off < pcm.size(); off += chunk_bytes) {
    const std::size_t len = std::min(chunk_bytes, pcm.size() - off);
    out.push_back({utt_id, seq++, {pcm.begin() + off, pcm.begin() + off + len}});
  }
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    s.push_back(kHex[b >> 4]);
    s.push_back(kHex[b & 0xF]);
  }
  return s;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::vector<std::uint8_t> out;
  int hi = -1;
  for (char c : hex) {
    if (c == ' ' || c == ':') continue;
    const int v = nibble(c);
    if (v < 0) throw Error(ErrorCode::kInvalidMessage, "bad hex digit");
    if (hi < 0) {
      hi = v;
    } else {
      out.push_back(static_cast<std::uint8_t>((hi << 4) | v));
      hi = -1;
    }
  }
  if (hi >= 0) throw Error(ErrorCode::kInvalidMessage, "odd number of hex digits");
  return out;
}

std::string golden_vectors_json() {
  ojson vectors = ojson::array();
  auto add_message = [&](const std::string& name, const Message& m) {
    vectors.push_back(ojson{{"name", name},
                            {"hex", to_hex(encode(m))},
                            {"expect", "message"},
                            {"message", message_json(m)}});
  };
  auto add_raw = [&](const std::string& name, const std::vector<std::uint8_t>& bytes) {
    const DecodeResult r = decode(bytes);
    ojson v{{"name", name}, {"hex", to_hex(bytes)}};
    if (r.status == DecodeStatus::kNeedMoreData) {
      v["expect"] = "need_more_data";
    } else if (r.status == DecodeStatus::kProtocolError) {
      v["expect"] = "protocol_error";
      v["error"] = std::string(protocol_error_name(r.error));
    } else {
      v["expect"] = "message";
      v["message"] = message_json(r.message);
    }
    vectors.push_back(std::move(v));
  };

  add_message("hello", Hello{});
  add_message("hello_8khz", Hello{1, 8000, 1, 16, 0});
  add_message("hello_ack_accepted", HelloAck{1, 1});
  add_message("hello_ack_rejected", HelloAck{0, 1});
  add_message("utt_start_7", UttStart{7});
  add_message("audio_chunk", AudioChunk{7, 0, {0x00, 0x80, 0xff, 0x7f, 0x00, 0x40}});
  add_message("audio_chunk_empty", AudioChunk{7, 1, {}});
  add_message("utt_end_7", UttEnd{7});
  add_message("transcript_go", Transcript{1, "go", 9000});
  add_message("transcript_utf8", Transcript{2, "caf\xc3\xa9 \xe2\x9c\x93", 0});
  add_message("error_1001", ErrorMsg{kErrProtocolViolation, "protocol violation"});
  add_message("error_1004_empty", ErrorMsg{kErrUnknownUtterance, ""});
  add_message("ping", Ping{});
  add_message("pong", Pong{});

  add_raw("truncated_header", {0x00, 0x00, 0x00});
  add_raw("truncated_payload", {0x00, 0x00, 0x00, 0x05, 0x10, 0x00, 0x00});
  add_raw("zero_length", {0x00, 0x00, 0x00, 0x00});
  add_raw("unknown_type", {0x00, 0x00, 0x00, 0x01, 0x77});
  add_raw("oversize", {0x00, 0x10, 0x00, 0x01, 0x11});
  add_raw("ping_with_payload", {0x00, 0x00, 0x00, 0x02, 0x40, 0x00});
  add_raw("odd_pcm", {0x00, 0x00, 0x00, 0x0a, 0x11, 0, 0, 0, 1, 0, 0, 0, 0, 0x01});
  add_raw("bad_utf8", {0x00, 0x00, 0x00, 0x0c, 0x20, 0, 0, 0, 1, 0, 0, 0, 1, 0xff, 0x00, 0x00});
  add_raw("confidence_over", {0x00, 0x00, 0x00, 0x0b, 0x20, 0, 0, 0, 1, 0, 0, 0, 0, 0x27, 0x11});

  ojson doc{{"format", "hasr-wire-vectors"}, {"proto_version", kProtoVersion},
            {"vectors", std::move(vectors)}};
  return doc.dump(2) + "\n";
}

}  // namespace hasr::wire
