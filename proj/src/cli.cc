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

#include "hasr/cli.h"

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hasr/audio.h"
#include "hasr/edge.h"
#include "hasr/error.h"
#include "hasr/net.h"
#include "hasr/protocol.h"
#include "hasr/recognizer.h"
#include "hasr/server.h"
#include "hasr/synth.h"

namespace hasr {
namespace {

using Json = nlohmann::ordered_json;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::kInvalidConfig ? kExitUsage : kExitRuntime;
}

Json recognition_json(const Recognition& r) {
  Json j;
  j["best_word"] = r.best_word ? Json(*r.best_word) : Json(nullptr);
  j["best_score"] = std::isfinite(r.best_score) ? Json(r.best_score) : Json(nullptr);
  Json scores = Json::object();
  for (const auto& [w, s] : r.scores) scores[w] = std::isfinite(s) ? Json(s) : Json(nullptr);
  j["scores"] = scores;
  j["t_frames"] = r.t_frames;
  return j;
}

Json report_json(const EvalReport& r) {
  Json j;
  j["accuracy"] = r.accuracy;
  j["n_test"] = r.n_test;
  j["labels"] = r.labels;
  j["confusion"] = r.confusion;
  Json per = Json::object();
  for (const auto& [w, a] : r.per_word_accuracy) per[w] = a;
  j["per_word_accuracy"] = per;
  return j;
}

struct TrainArgs {
  std::string data, out;
  std::vector<std::string> words;
  std::size_t states = 5, codebook = 64, skip = 2, max_iters = 40;
  std::uint64_t seed = 17;
};

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig cfg;
  cfg.words = a.words;
  cfg.n_states = a.states;
  cfg.codebook_k = a.codebook;
  cfg.skip = a.skip;
  cfg.seed = a.seed;
  cfg.bw.max_iters = a.max_iters;
  cfg.validate();
  const DatasetIndex index = scan_dataset(a.data, cfg.words);
  TrainLog log;
  const WordModelSet ms = train_word_models(index, cfg, &log);
  save_model(a.out, ms);

  Json j;
  j["model"] = a.out;
  j["codebook_k"] = ms.codebook.k();
  j["codebook_frames"] = log.codebook_frames;
  j["codebook_distortion"] = log.codebook_distortion;
  Json words = Json::array();
  for (const auto& w : log.words) {
    Json wj;
    wj["word"] = w.word;
    wj["sequences"] = w.n_sequences;
    wj["frames"] = w.n_frames;
    wj["iterations"] = w.iterations;
    wj["initial_log_likelihood"] = w.initial_log_likelihood;
    wj["final_log_likelihood"] = w.final_log_likelihood;
    words.push_back(wj);
    err << w.word << ": " << w.n_sequences << " clips, final log-likelihood "
        << w.final_log_likelihood << " after " << w.iterations << " iterations\n";
  }
  j["words"] = words;
  out << j.dump() << "\n";
  err << "wrote " << a.out << "\n";
  return kExitOk;
}

struct EdgeArgs {
  std::string model, input, policy = "local", connect;
  std::optional<double> threshold;
};

int cmd_edge(const EdgeArgs& a, std::ostream& out, std::ostream& err) {
  const auto policy = parse_policy(a.policy);
  if (!policy) {
    throw Error(ErrorCode::kInvalidConfig,
                "unknown policy \"" + a.policy + "\" (local, remote or hybrid)");
  }
  EdgeConfig cfg;
  cfg.policy = *policy;
  cfg.threshold = a.threshold;
  if (!a.connect.empty()) cfg.server = net::parse_endpoint(a.connect);
  std::shared_ptr<const WordModelSet> model;
  if (!a.model.empty()) model = std::make_shared<WordModelSet>(load_model(a.model));

  EdgeRuntime rt(cfg, model, [&](const EdgeEvent& e) { out << event_to_json(e) << std::endl; });
  if (cfg.policy == EdgePolicy::kHybrid && !rt.remote_connected()) {
    err << "warning: server " << a.connect << " unavailable, continuing with local decisions\n";
  }
  if (a.input == "-") {
    std::vector<char> buf(wire::kPreferredChunkBytes);
    std::vector<std::uint8_t> carry;
    while (std::cin.read(buf.data(), static_cast<std::streamsize>(buf.size())) ||
           std::cin.gcount() > 0) {
      carry.insert(carry.end(), buf.begin(), buf.begin() + std::cin.gcount());
      const std::size_t even = carry.size() & ~std::size_t{1};
      const auto samples = samples_from_pcm(std::span<const std::uint8_t>(carry).first(even));
      carry.erase(carry.begin(), carry.begin() + static_cast<std::ptrdiff_t>(even));
      rt.feed(samples);
    }
  } else {
    rt.process_clip(read_wav(a.input));
  }
  rt.finish();
  err << rt.utterances() << " utterances\n";
  if (cfg.policy == EdgePolicy::kRemoteOnly && rt.remote_failed()) {
    err << "error: server link failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hybrid keyword spotting and speech offload"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train per-word HMMs on a dataset's Train split");
  c_train->add_option("--data", train.data, "Dataset root holding <word>/*.wav")->required();
  c_train->add_option("--words", train.words, "Comma-separated word list")
      ->required()
      ->delimiter(',');
  c_train->add_option("--out", train.out, "Output model file (*.hasr.json)")->required();
  c_train->add_option("--states", train.states, "HMM states per word")->capture_default_str();
  c_train->add_option("--codebook", train.codebook, "VQ codebook size")->capture_default_str();
  c_train->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  c_train->add_option("--skip", train.skip, "Largest forward jump between states")
      ->capture_default_str();
  c_train->add_option("--max-iters", train.max_iters, "Baum-Welch iteration cap")
      ->capture_default_str();

  std::string rec_model, rec_wav;
  std::optional<double> rec_threshold;
  auto* c_rec = app.add_subcommand("recognize", "Recognize one WAV clip");
  c_rec->add_option("--model", rec_model, "Model file")->required();
  c_rec->add_option("--wav", rec_wav, "16 kHz mono 16-bit WAV")->required();
  c_rec->add_option("--threshold", rec_threshold, "Reject below this per-frame score");

  std::string ev_model, ev_data;
  std::optional<double> ev_min;
  auto* c_eval = app.add_subcommand("evaluate", "Evaluate a model on a dataset's Test split");
  c_eval->add_option("--model", ev_model, "Model file")->required();
  c_eval->add_option("--data", ev_data, "Dataset root holding <word>/*.wav")->required();
  c_eval->add_option("--min-accuracy", ev_min, "Exit 3 when accuracy is below this")
      ->check(CLI::Range(0.0, 1.0));

  std::string sv_listen, sv_backend, sv_log;
  auto* c_serve = app.add_subcommand("serve", "Run the transcription server");
  c_serve->add_option("--listen", sv_listen, "host:port to listen on")->required();
  c_serve->add_option("--backend", sv_backend,
                      "mock:fixed:TEXT, mock:table:FILE or mock:echohash")
      ->required();
  c_serve->add_option("--log", sv_log, "Append transcripts as JSON lines to this file");

  EdgeArgs edge;
  auto* c_edge = app.add_subcommand("edge", "Segment audio and emit keyword/transcript events");
  c_edge->add_option("--model", edge.model, "Model file (local and hybrid policies)");
  c_edge->add_option("--input", edge.input, "WAV file, or - for raw 16 kHz int16 PCM on stdin")
      ->required();
  c_edge->add_option("--policy", edge.policy, "local, remote or hybrid")->capture_default_str();
  c_edge->add_option("--connect", edge.connect, "Server host:port (remote and hybrid)");
  c_edge->add_option("--threshold", edge.threshold, "Reject below this per-frame score");

  std::string sy_out;
  std::vector<std::string> sy_words;
  std::size_t sy_clips = 50;
  std::uint64_t sy_seed = 17;
  auto* c_synth = app.add_subcommand("synth", "Write a synthetic keyword dataset");
  c_synth->add_option("--out", sy_out, "Dataset root")->required();
  c_synth->add_option("--words", sy_words, "Comma-separated word list")
      ->required()
      ->delimiter(',');
  c_synth->add_option("--clips", sy_clips, "Clips per word")->capture_default_str();
  c_synth->add_option("--seed", sy_seed, "Random seed")->capture_default_str();

  std::string pv_out;
  auto* c_vectors = app.add_subcommand("protocol-vectors", "Print the wire golden vectors");
  c_vectors->add_option("--out", pv_out, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*c_train) return cmd_train(train, out, err);
    if (*c_rec) {
      const WordModelSet ms = load_model(rec_model);
      const Recognition r = recognize(ms, read_wav(rec_wav), rec_threshold);
      out << recognition_json(r).dump() << "\n";
      return kExitOk;
    }
    if (*c_eval) {
      const WordModelSet ms = load_model(ev_model);
      const EvalReport r = evaluate(ms, scan_dataset(ev_data, ms.words()));
      out << report_json(r).dump() << "\n";
      if (ev_min && r.accuracy < *ev_min) {
        err << "accuracy " << r.accuracy << " is below " << *ev_min << "\n";
        return kExitBelowTarget;
      }
      return kExitOk;
    }
    if (*c_serve) {
      ServerOptions opts;
      opts.listen = net::parse_endpoint(sv_listen);
      if (!sv_log.empty()) opts.log_path = sv_log;
      std::shared_ptr<TranscriberBackend> backend = make_backend(sv_backend);
      Server server(opts, backend);
      server.start();
      g_stop = false;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      Json j;
      j["listening"] = opts.listen.host + ":" + std::to_string(server.port());
      j["backend"] = backend->name();
      out << j.dump() << std::endl;
      err << "serving on port " << server.port() << ", Ctrl-C to stop\n";
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
      server.stop();
      return kExitOk;
    }
    if (*c_edge) return cmd_edge(edge, out, err);
    if (*c_synth) {
      write_synthetic_dataset(sy_out, sy_words, sy_clips, sy_seed);
      Json j;
      j["root"] = sy_out;
      j["words"] = sy_words;
      j["clips_per_word"] = sy_clips;
      out << j.dump() << "\n";
      return kExitOk;
    }
    if (*c_vectors) {
      const std::string doc = wire::golden_vectors_json();
      if (pv_out.empty()) {
        out << doc;
      } else {
        std::ofstream f(pv_out, std::ios::binary);
        if (!f || !(f << doc)) throw Error(ErrorCode::kIo, "cannot write " + pv_out);
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace hasr
