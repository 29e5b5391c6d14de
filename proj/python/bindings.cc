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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "hasr/audio.h"
#include "hasr/endpoint.h"
#include "hasr/error.h"
#include "hasr/features.h"
#include "hasr/hmm.h"
#include "hasr/protocol.h"
#include "hasr/recognizer.h"
#include "hasr/synth.h"

namespace py = pybind11;

namespace hasr {
namespace {

AudioClip clip_of(std::vector<double> samples) {
  AudioClip c;
  c.samples = std::move(samples);
  return c;
}

std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

Hmm hmm_of(std::vector<double> pi, const std::vector<std::vector<double>>& a,
           const std::vector<std::vector<double>>& b) {
  return Hmm{std::move(pi), Matrix::from_rows(a), Matrix::from_rows(b)};
}

py::dict recognition_dict(const Recognition& r) {
  py::dict d;
  d["best_word"] = r.best_word ? py::cast(*r.best_word) : py::none();
  d["best_score"] = r.best_score;
  d["scores"] = r.scores;
  d["t_frames"] = r.t_frames;
  return d;
}

py::bytes as_bytes(const std::vector<std::uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()), v.size());
}

std::vector<std::uint8_t> from_bytes(const py::bytes& b) {
  const std::string s = b;
  return {s.begin(), s.end()};
}

py::dict message_dict(const wire::Message& m) {
  py::dict d;
  d["type"] = std::string(wire::type_name(wire::type_of(m)));
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, wire::Hello>) {
          d["proto_version"] = v.proto_version;
          d["sample_rate"] = v.sample_rate;
          d["channels"] = v.channels;
          d["bits"] = v.bits;
          d["encoding"] = v.encoding;
        } else if constexpr (std::is_same_v<T, wire::HelloAck>) {
          d["accepted"] = v.accepted;
          d["proto_version"] = v.proto_version;
        } else if constexpr (std::is_same_v<T, wire::UttStart> || std::is_same_v<T, wire::UttEnd>) {
          d["utt_id"] = v.utt_id;
        } else if constexpr (std::is_same_v<T, wire::AudioChunk>) {
          d["utt_id"] = v.utt_id;
          d["seq"] = v.seq;
          d["pcm"] = as_bytes(v.pcm);
        } else if constexpr (std::is_same_v<T, wire::Transcript>) {
          d["utt_id"] = v.utt_id;
          d["text"] = v.text;
          d["confidence"] = v.confidence_bp;
        } else if constexpr (std::is_same_v<T, wire::ErrorMsg>) {
          d["code"] = v.code;
          d["message"] = v.message;
        }
      },
      m);
  return d;
}

wire::Message message_of(const py::dict& d) {
  const std::string type = d["type"].cast<std::string>();
  auto get = [&](const char* key, auto fallback) {
    using T = decltype(fallback);
    return d.contains(key) ? d[key].cast<T>() : fallback;
  };
  if (type == "Hello") {
    wire::Hello h;
    return wire::Hello{get("proto_version", h.proto_version), get("sample_rate", h.sample_rate),
                       get("channels", h.channels), get("bits", h.bits),
                       get("encoding", h.encoding)};
  }
  if (type == "HelloAck") {
    return wire::HelloAck{get("accepted", std::uint8_t{1}),
                          get("proto_version", wire::kProtoVersion)};
  }
  const auto utt = get("utt_id", std::uint32_t{0});
  if (type == "UttStart") return wire::UttStart{utt};
  if (type == "UttEnd") return wire::UttEnd{utt};
  if (type == "AudioChunk") {
    return wire::AudioChunk{utt, get("seq", std::uint32_t{0}),
                            from_bytes(get("pcm", py::bytes()))};
  }
  if (type == "Transcript") {
    return wire::Transcript{utt, get("text", std::string()), get("confidence", std::uint16_t{0})};
  }
  if (type == "Error") {
    return wire::ErrorMsg{get("code", std::uint16_t{0}), get("message", std::string())};
  }
  if (type == "Ping") return wire::Ping{};
  if (type == "Pong") return wire::Pong{};
  throw Error(ErrorCode::kInvalidConfig, "unknown message type \"" + type + "\"");
}

}  // namespace
}  // namespace hasr

PYBIND11_MODULE(_core, m) {
  using namespace hasr;
  m.doc() = "Keyword spotting, endpointing and wire protocol bindings";
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("read_wav", [](const std::string& path) { return read_wav(path).samples; },
        py::arg("path"), "Samples in [-1, 1) from a 16 kHz mono 16-bit WAV.");
  m.def("write_wav",
        [](const std::string& path, std::vector<double> samples) {
          write_wav(path, clip_of(std::move(samples)));
        },
        py::arg("path"), py::arg("samples"));
  m.def("mfcc",
        [](std::vector<double> samples) { return rows_of(mfcc(clip_of(std::move(samples))).frames); },
        py::arg("samples"), "T x 13 cepstra with mean normalization.");
  m.def("segment",
        [](std::vector<double> samples) {
          std::vector<std::pair<std::size_t, std::size_t>> out;
          for (const auto& s : segment(clip_of(std::move(samples)))) {
            out.emplace_back(s.start_sample, s.end_sample);
          }
          return out;
        },
        py::arg("samples"), "Speech segments as [start, end) sample ranges.");
  m.def("synth_clip",
        [](const std::string& word, std::uint64_t seed, std::size_t index) {
          return synth_word_clip(word, seed, index).samples;
        },
        py::arg("word"), py::arg("seed") = 17, py::arg("index") = 0);
  m.def("write_synthetic_dataset",
        [](const std::string& root, const std::vector<std::string>& words, std::size_t clips,
           std::uint64_t seed) { write_synthetic_dataset(root, words, clips, seed); },
        py::arg("root"), py::arg("words"), py::arg("clips_per_word") = 50, py::arg("seed") = 17);

  m.def("forward_log_likelihood",
        [](std::vector<double> pi, const std::vector<std::vector<double>>& a,
           const std::vector<std::vector<double>>& b, const SymbolSequence& obs) {
          return forward_scaled(hmm_of(std::move(pi), a, b), obs).log_likelihood;
        },
        py::arg("pi"), py::arg("a"), py::arg("b"), py::arg("obs"));
  m.def("viterbi",
        [](std::vector<double> pi, const std::vector<std::vector<double>>& a,
           const std::vector<std::vector<double>>& b, const SymbolSequence& obs) {
          const auto v = viterbi(hmm_of(std::move(pi), a, b), obs);
          return std::make_pair(v.path, v.log_prob);
        },
        py::arg("pi"), py::arg("a"), py::arg("b"), py::arg("obs"),
        "Best state path and its log probability.");

  py::class_<WordModelSet>(m, "Model")
      .def_static("load", [](const std::string& path) { return load_model(path); })
      .def_static("from_json", &model_from_json)
      .def("to_json", &model_to_json)
      .def("save", [](const WordModelSet& ms, const std::string& path) { save_model(path, ms); })
      .def_property_readonly("words", &WordModelSet::words)
      .def(
          "recognize",
          [](const WordModelSet& ms, std::vector<double> samples, std::optional<double> threshold) {
            return recognition_dict(recognize(ms, clip_of(std::move(samples)), threshold));
          },
          py::arg("samples"), py::arg("threshold") = py::none())
      .def("evaluate", [](const WordModelSet& ms, const std::string& data) {
        const EvalReport r = evaluate(ms, scan_dataset(data, ms.words()));
        py::dict d;
        d["accuracy"] = r.accuracy;
        d["n_test"] = r.n_test;
        d["labels"] = r.labels;
        d["confusion"] = r.confusion;
        d["per_word_accuracy"] = r.per_word_accuracy;
        return d;
      });
  m.def("train",
        [](const std::string& data, const std::vector<std::string>& words, std::size_t states,
           std::size_t codebook, std::uint64_t seed) {
          TrainConfig cfg;
          cfg.words = words;
          cfg.n_states = states;
          cfg.codebook_k = codebook;
          cfg.seed = seed;
          cfg.validate();
          py::gil_scoped_release release;
          return train_word_models(scan_dataset(data, words), cfg);
        },
        py::arg("data"), py::arg("words"), py::arg("states") = 5, py::arg("codebook") = 64,
        py::arg("seed") = 17, "Train per-word models on the Train split of a dataset.");

  m.def("encode", [](const py::dict& d) { return as_bytes(wire::encode(message_of(d))); },
        py::arg("message"), "One frame for a message dict with a \"type\" key.");
  m.def("decode",
        [](const py::bytes& frame) -> py::object {
          const auto buf = from_bytes(frame);
          const auto r = wire::decode(buf);
          py::dict d;
          switch (r.status) {
            case wire::DecodeStatus::kNeedMoreData:
              return py::none();
            case wire::DecodeStatus::kProtocolError:
              throw Error(ErrorCode::kInvalidConfig,
                          std::string(wire::protocol_error_name(r.error)) + ": " + r.detail);
            case wire::DecodeStatus::kMessage:
              break;
          }
          return py::make_tuple(message_dict(r.message), r.consumed);
        },
        py::arg("buffer"),
        "(message, consumed) for the first frame, None if incomplete; raises on bad frames.");
  m.def("golden_vectors", &wire::golden_vectors_json);
}
