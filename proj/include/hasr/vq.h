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

#ifndef HASR_VQ_H_
#define HASR_VQ_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hasr/features.h"
#include "hasr/matrix.h"

namespace hasr {

using Symbol = std::uint32_t;
using SymbolSequence = std::vector<Symbol>;

struct Codebook {
  Matrix centroids;  // k x dim
  double training_distortion = 0.0;

  std::size_t k() const { return centroids.rows(); }
  std::size_t dim() const { return centroids.cols(); }
};

struct KMeansOptions {
  std::size_t k = 64;
  std::uint64_t seed = 17;
  std::size_t max_iters = 100;
};

struct KMeansResult {
  Codebook codebook;
  // Mean squared distance after each assignment step, in order. Lloyd's
  // algorithm guarantees this is non-increasing.
  std::vector<double> distortion_history;
  std::size_t iterations = 0;
  bool converged = false;  // assignment fixpoint reached
};

// Lloyd's k-means with k-means++ seeding driven by Rng(seed). Rows of `points`
// are the samples. Empty clusters are re-seeded to the point farthest from
// its assigned centroid.
KMeansResult kmeans(const Matrix& points, const KMeansOptions& opts);

Codebook train_codebook(const Matrix& points, std::size_t k, std::uint64_t seed);

// Nearest centroid by squared Euclidean distance; ties go to the lower index.
Symbol nearest_centroid(const Codebook& cb, std::span<const double> frame);

SymbolSequence quantize(const Codebook& cb, const Matrix& frames);
SymbolSequence quantize(const Codebook& cb, const FeatureMatrix& fm);

}  // namespace hasr

#endif  // HASR_VQ_H_
