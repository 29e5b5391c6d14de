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

#include "hasr/recognizer.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "hasr/error.h"

namespace hasr {
namespace {

using ojson = nlohmann::ordered_json;

[[noreturn]] void invalid_model(const std::string& what) {
  throw Error(ErrorCode::kInvalidModel, "model: " + what);
}

ojson matrix_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const ojson& j, const std::string& what) {
  if (!j.is_array()) invalid_model(what + " is not an array");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) invalid_model(what + " row is not an array");
    rows.push_back(r.get<std::vector<double>>());
  }
  try {
    return Matrix::from_rows(rows);
  } catch (const Error&) {
    invalid_model(what + " is ragged");
  }
}

ojson feature_cfg_json(const FeatureConfig& c) {
  return ojson{{"frame_len", c.frame_len}, {"hop", c.hop},
               {"fft_size", c.fft_size},   {"n_mel", c.n_mel},
               {"n_ceps", c.n_ceps},       {"preemphasis", c.preemphasis},
               {"cmn", c.cmn},             {"log_floor", c.log_floor}};
}

FeatureConfig feature_cfg_from_json(const ojson& j) {
  FeatureConfig c;
  c.frame_len = j.at("frame_len").get<std::size_t>();
  c.hop = j.at("hop").get<std::size_t>();
  c.fft_size = j.at("fft_size").get<std::size_t>();
  c.n_mel = j.at("n_mel").get<std::size_t>();
  c.n_ceps = j.at("n_ceps").get<std::size_t>();
  c.preemphasis = j.at("preemphasis").get<double>();
  c.cmn = j.at("cmn").get<bool>();
  c.log_floor = j.at("log_floor").get<double>();
  return c;
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, "train config: " + what);
  };
  if (words.empty()) fail("word list is empty");
  std::set<std::string> seen;
  for (const auto& w : words) {
    if (w.empty()) fail("empty word label");
    if (!seen.insert(w).second) fail("duplicate word \"" + w + "\"");
  }
  if (n_states < 2) fail("n_states must be at least 2, got " + std::to_string(n_states));
  if (skip < 1 || skip > 2) fail("skip must be 1 or 2, got " + std::to_string(skip));
  if (codebook_k < 1) fail("codebook size must be at least 1");
  features.validate();
}

std::vector<std::string> WordModelSet::words() const {
  std::vector<std::string> out;
  for (const auto& [w, _] : models) out.push_back(w);
  return out;
}

void WordModelSet::validate() const {
  if (format_version != kModelFormatVersion) {
    invalid_model("unsupported format_version " + std::to_string(format_version));
  }
  try {
    feature_cfg.validate();
  } catch (const Error& e) {
    invalid_model(e.what());
  }
  if (codebook.k() == 0) invalid_model("codebook is empty");
  if (codebook.dim() != feature_cfg.n_ceps) {
    invalid_model("codebook dimension " + std::to_string(codebook.dim()) +
                  " does not match n_ceps " + std::to_string(feature_cfg.n_ceps));
  }
  for (double v : codebook.centroids.data()) {
    if (!std::isfinite(v)) invalid_model("codebook has a non-finite centroid");
  }
  if (models.empty()) invalid_model("no word models");
  for (const auto& [word, h] : models) {
    if (auto problems = hasr::validate(h); !problems.empty()) {
      invalid_model("word \"" + word + "\": " + problems.front());
    }
    if (h.n_symbols() != codebook.k()) {
      invalid_model("word \"" + word + "\" has " + std::to_string(h.n_symbols()) +
                    " symbols, codebook has " + std::to_string(codebook.k()));
    }
  }
}

std::map<std::string, Hmm> train_word_hmms(
    const std::map<std::string, std::vector<SymbolSequence>>& sequences,
    std::size_t n_symbols, const TrainConfig& cfg, TrainLog* log) {
  cfg.validate();
  std::map<std::string, Hmm> models;
  for (const auto& word : cfg.words) {
    auto it = sequences.find(word);
    const std::size_t have = it == sequences.end() ? 0 : it->second.size();
    if (have < cfg.min_train_clips) {
      throw Error(ErrorCode::kInsufficientData,
                  "word \"" + word + "\" has " + std::to_string(have) +
                      " training clips, need at least " +
                      std::to_string(cfg.min_train_clips));
    }
    const Hmm h0 = left_right_model(cfg.n_states, n_symbols, cfg.skip);
    BaumWelchResult bw = baum_welch(h0, it->second, cfg.bw);
    if (log) {
      WordTrainStats s;
      s.word = word;
      s.n_sequences = it->second.size();
      for (const auto& seq : it->second) s.n_frames += seq.size();
      s.iterations = bw.iterations;
      s.initial_log_likelihood = bw.history.front();
      s.final_log_likelihood = bw.history.back();
      log->words.push_back(s);
    }
    models.emplace(word, std::move(bw.model));
  }
  return models;
}

WordModelSet train_word_models(const DatasetIndex& index, const TrainConfig& cfg,
                               TrainLog* log) {
  cfg.validate();
  const std::set<std::string> vocabulary(cfg.words.begin(), cfg.words.end());

  std::map<std::string, std::vector<FeatureMatrix>> feats;
  std::size_t total_frames = 0;
  for (const auto& e : index.entries) {
    if (e.split != Split::kTrain || !vocabulary.count(e.label)) continue;
    FeatureMatrix fm = mfcc(read_wav(e.path), cfg.features);
    total_frames += fm.num_frames();
    feats[e.label].push_back(std::move(fm));
  }
  for (const auto& word : cfg.words) {
    const std::size_t have = feats.count(word) ? feats[word].size() : 0;
    if (have < cfg.min_train_clips) {
      throw Error(ErrorCode::kInsufficientData,
                  "word \"" + word + "\" has " + std::to_string(have) +
                      " training clips, need at least " +
                      std::to_string(cfg.min_train_clips));
    }
  }

  // Pool frames in word order, then clip order.
  Matrix pooled(total_frames, cfg.features.n_ceps);
  std::size_t r = 0;
  for (const auto& word : cfg.words) {
    for (const auto& fm : feats[word]) {
      std::copy(fm.frames.data().begin(), fm.frames.data().end(),
                pooled.row(r).begin());
      r += fm.num_frames();
    }
  }

  WordModelSet ms;
  ms.feature_cfg = cfg.features;
  ms.codebook = train_codebook(pooled, cfg.codebook_k, cfg.seed);
  if (log) {
    log->codebook_distortion = ms.codebook.training_distortion;
    log->codebook_frames = total_frames;
  }

  std::map<std::string, std::vector<SymbolSequence>> sequences;
  for (const auto& word : cfg.words) {
    for (const auto& fm : feats[word]) {
      sequences[word].push_back(quantize(ms.codebook, fm));
    }
  }
  ms.models = train_word_hmms(sequences, ms.codebook.k(), cfg, log);
  return ms;
}

Recognition decide(std::map<std::string, double> scores, std::size_t t_frames,
                   std::optional<double> threshold) {
  Recognition rec;
  rec.t_frames = t_frames;
  const std::string* best = nullptr;
  for (const auto& [word, score] : scores) {
    if (best == nullptr || score > rec.best_score) {
      best = &word;
      rec.best_score = score;
    }
  }
  // No model can produce the clip when every score is -inf.
  if (best != nullptr && rec.best_score > -std::numeric_limits<double>::infinity() &&
      !(threshold && rec.best_score < *threshold)) {
    rec.best_word = *best;
  }
  rec.scores = std::move(scores);
  return rec;
}

Recognition recognize_symbols(const WordModelSet& ms, const SymbolSequence& obs,
                              std::optional<double> threshold) {
  std::map<std::string, double> scores;
  const double t = static_cast<double>(obs.size());
  for (const auto& [word, h] : ms.models) {
    try {
      scores[word] = forward_scaled(h, obs).log_likelihood / t;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroProbabilitySequence) throw;
      scores[word] = -std::numeric_limits<double>::infinity();
    }
  }
  return decide(std::move(scores), obs.size(), threshold);
}

Recognition recognize_features(const WordModelSet& ms, const FeatureMatrix& fm,
                               std::optional<double> threshold) {
  return recognize_symbols(ms, quantize(ms.codebook, fm), threshold);
}

Recognition recognize(const WordModelSet& ms, const AudioClip& clip,
                      std::optional<double> threshold) {
  return recognize_features(ms, mfcc(clip, ms.feature_cfg), threshold);
}

EvalReport tabulate(const std::vector<std::string>& labels,
                    const std::vector<std::pair<std::string, std::string>>& outcomes) {
  EvalReport rep;
  rep.labels = labels;
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < labels.size(); ++i) pos[labels[i]] = i;
  rep.confusion.assign(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  std::size_t correct = 0;
  for (const auto& [truth, predicted] : outcomes) {
    auto t = pos.find(truth);
    auto p = pos.find(predicted);
    if (t == pos.end() || p == pos.end()) {
      throw Error(ErrorCode::kInvalidConfig,
                  "outcome (" + truth + ", " + predicted + ") outside label set");
    }
    ++rep.confusion[t->second][p->second];
    if (t->second == p->second) ++correct;
  }
  rep.n_test = outcomes.size();
  rep.accuracy = rep.n_test ? static_cast<double>(correct) / rep.n_test : 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t row = 0;
    for (std::size_t c : rep.confusion[i]) row += c;
    rep.per_word_accuracy[labels[i]] =
        row ? static_cast<double>(rep.confusion[i][i]) / row : 0.0;
  }
  return rep;
}

EvalReport evaluate(const WordModelSet& ms, const DatasetIndex& index) {
  const auto labels = ms.words();
  std::map<std::string, std::size_t> test_counts;
  std::vector<std::pair<std::string, std::string>> outcomes;
  for (const auto& e : index.entries) {
    if (e.split != Split::kTest) continue;
    if (!ms.models.count(e.label)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "test entry label \"" + e.label + "\" has no model");
    }
    ++test_counts[e.label];
    Recognition rec = recognize(ms, read_wav(e.path));
    // Without a threshold a decision always exists.
    outcomes.emplace_back(e.label, *rec.best_word);
  }
  for (const auto& w : labels) {
    if (!test_counts.count(w)) {
      throw Error(ErrorCode::kInsufficientData,
                  "no test clips for word \"" + w + "\"");
    }
  }
  return tabulate(labels, outcomes);
}

std::string model_to_json(const WordModelSet& ms) {
  ojson j;
  j["format_version"] = ms.format_version;
  j["feature_cfg"] = feature_cfg_json(ms.feature_cfg);
  j["codebook"] = ojson{{"k", ms.codebook.k()},
                        {"dim", ms.codebook.dim()},
                        {"centroids", matrix_json(ms.codebook.centroids)}};
  ojson words = ojson::array();
  for (const auto& [label, h] : ms.models) {
    words.push_back(ojson{{"label", label},
                          {"pi", h.pi},
                          {"a", matrix_json(h.a)},
                          {"b", matrix_json(h.b)}});
  }
  j["words"] = std::move(words);
  return j.dump() + "\n";
}

WordModelSet model_from_json(const std::string& text) {
  WordModelSet ms;
  try {
    const ojson j = ojson::parse(text);
    ms.format_version = j.at("format_version").get<int>();
    if (ms.format_version != kModelFormatVersion) {
      invalid_model("unsupported format_version " + std::to_string(ms.format_version));
    }
    ms.feature_cfg = feature_cfg_from_json(j.at("feature_cfg"));
    const auto& cb = j.at("codebook");
    ms.codebook.centroids = matrix_from_json(cb.at("centroids"), "codebook.centroids");
    if (cb.at("k").get<std::size_t>() != ms.codebook.k() ||
        cb.at("dim").get<std::size_t>() != ms.codebook.dim()) {
      invalid_model("codebook k/dim disagree with centroid matrix");
    }
    for (const auto& w : j.at("words")) {
      const auto label = w.at("label").get<std::string>();
      Hmm h{w.at("pi").get<std::vector<double>>(),
            matrix_from_json(w.at("a"), label + ".a"),
            matrix_from_json(w.at("b"), label + ".b")};
      if (!ms.models.emplace(label, std::move(h)).second) {
        invalid_model("duplicate word \"" + label + "\"");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    invalid_model(std::string("malformed JSON: ") + e.what());
  }
  ms.validate();
  return ms;
}

void save_model(const std::filesystem::path& path, const WordModelSet& ms) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << model_to_json(ms);
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

WordModelSet load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace hasr
