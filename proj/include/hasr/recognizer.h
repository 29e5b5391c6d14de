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

#ifndef HASR_RECOGNIZER_H_
#define HASR_RECOGNIZER_H_

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hasr/audio.h"
#include "hasr/features.h"
#include "hasr/hmm.h"
#include "hasr/vq.h"

namespace hasr {

inline constexpr int kModelFormatVersion = 1;

struct TrainConfig {
  std::vector<std::string> words;
  std::size_t n_states = 5;
  std::size_t skip = 2;  // largest forward jump; 1 = strictly next state
  std::size_t codebook_k = 64;
  std::uint64_t seed = 17;
  std::size_t min_train_clips = 10;
  BaumWelchConfig bw;
  FeatureConfig features;

  void validate() const;
};

struct WordModelSet {
  int format_version = kModelFormatVersion;
  FeatureConfig feature_cfg;
  Codebook codebook;
  std::map<std::string, Hmm> models;  // ordered by label

  std::string feature_config_hash() const { return feature_cfg.hash(); }
  std::vector<std::string> words() const;

  // Throws kInvalidModel naming the first broken invariant.
  void validate() const;
};

struct WordTrainStats {
  std::string word;
  std::size_t n_sequences = 0;
  std::size_t n_frames = 0;
  std::size_t iterations = 0;
  double initial_log_likelihood = 0.0;
  double final_log_likelihood = 0.0;
};

struct TrainLog {
  double codebook_distortion = 0.0;
  std::size_t codebook_frames = 0;
  std::vector<WordTrainStats> words;
};

// Trains one left-right HMM per word over already-quantized sequences.
std::map<std::string, Hmm> train_word_hmms(
    const std::map<std::string, std::vector<SymbolSequence>>& sequences,
    std::size_t n_symbols, const TrainConfig& cfg, TrainLog* log = nullptr);

// Full pipeline on the Train split: MFCC, pooled k-means codebook,
// quantization, per-word Baum-Welch.
WordModelSet train_word_models(const DatasetIndex& index, const TrainConfig& cfg,
                               TrainLog* log = nullptr);

struct Recognition {
  std::optional<std::string> best_word;  // nullopt = rejected
  std::map<std::string, double> scores;  // log-likelihood / T
  std::size_t t_frames = 0;
  double best_score = -std::numeric_limits<double>::infinity();
};

// Argmax over per-word scores; ties go to the lexicographically smallest
// word. Rejects when the best score is below `threshold` or when every score
// is -inf.
Recognition decide(std::map<std::string, double> scores, std::size_t t_frames,
                   std::optional<double> threshold);

Recognition recognize_symbols(const WordModelSet& ms, const SymbolSequence& obs,
                              std::optional<double> threshold = std::nullopt);
Recognition recognize_features(const WordModelSet& ms, const FeatureMatrix& fm,
                               std::optional<double> threshold = std::nullopt);
Recognition recognize(const WordModelSet& ms, const AudioClip& clip,
                      std::optional<double> threshold = std::nullopt);

struct EvalReport {
  std::vector<std::string> labels;                // row/column order
  std::vector<std::vector<std::size_t>> confusion;  // [truth][predicted]
  std::map<std::string, double> per_word_accuracy;
  std::size_t n_test = 0;
  double accuracy = 0.0;
};

// Builds the report from (truth, predicted) pairs.
EvalReport tabulate(const std::vector<std::string>& labels,
                    const std::vector<std::pair<std::string, std::string>>& outcomes);

// Recognizes every Test entry without a rejection threshold.
EvalReport evaluate(const WordModelSet& ms, const DatasetIndex& index);

// `*.hasr.json` model files.
std::string model_to_json(const WordModelSet& ms);
WordModelSet model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const WordModelSet& ms);
WordModelSet load_model(const std::filesystem::path& path);

}  // namespace hasr

#endif  // HASR_RECOGNIZER_H_
