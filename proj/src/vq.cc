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

#include "hasr/vq.h"

#include <cassert>
#include <limits>
#include <string>

#include "hasr/error.h"
#include "hasr/random.h"

namespace hasr {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    d += diff * diff;
  }
  return d;
}

struct Assignment {
  std::size_t index;
  double distance;
};

Assignment nearest(const Matrix& centroids, std::span<const double> x) {
  Assignment best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(centroids.row(c), x);
    if (d < best.distance) best = {c, d};
  }
  return best;
}

// k-means++: first centre uniform, later centres with probability
// proportional to squared distance from the nearest chosen centre.
Matrix seed_centroids(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows();
  Matrix centroids(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.index(n);
  for (std::size_t c = 0; c < k; ++c) {
    auto dst = centroids.row(c);
    auto src = points.row(pick);
    std::copy(src.begin(), src.end(), dst.begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points.row(i), dst));
      total += d2[i];
    }
    // Fewer distinct points than k: every remaining weight is zero, so fall
    // back to a uniform pick (duplicates are unavoidable then).
    pick = total > 0.0 ? rng.categorical(d2) : rng.index(n);
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, const KMeansOptions& opts) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  if (opts.k == 0) {
    throw Error(ErrorCode::kInvalidConfig, "codebook size must be at least 1");
  }
  if (n < opts.k) {
    throw Error(ErrorCode::kTooFewPoints,
                "k-means needs at least k=" + std::to_string(opts.k) +
                    " points, got " + std::to_string(n));
  }

  Rng rng(opts.seed);
  KMeansResult result;
  Matrix centroids = seed_centroids(points, opts.k, rng);
  std::vector<std::size_t> assign(n, std::numeric_limits<std::size_t>::max());
  std::vector<double> dist(n, 0.0);
  std::vector<std::size_t> counts(opts.k);
  Matrix sums(opts.k, dim);

  for (std::size_t iter = 0; iter < opts.max_iters; ++iter) {
    bool changed = false;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Assignment a = nearest(centroids, points.row(i));
      if (a.index != assign[i]) changed = true;
      assign[i] = a.index;
      dist[i] = a.distance;
      total += a.distance;
    }
    const double distortion = total / static_cast<double>(n);
    assert(result.distortion_history.empty() ||
           distortion <= result.distortion_history.back() * (1.0 + 1e-12) + 1e-300);
    result.distortion_history.push_back(distortion);
    result.iterations = iter + 1;
    if (!changed) {
      result.converged = true;
      break;
    }

    std::fill(counts.begin(), counts.end(), 0);
    std::fill(sums.data().begin(), sums.data().end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      auto s = sums.row(assign[i]);
      auto x = points.row(i);
      for (std::size_t d = 0; d < dim; ++d) s[d] += x[d];
    }
    for (std::size_t c = 0; c < opts.k; ++c) {
      if (counts[c] == 0) continue;
      auto dst = centroids.row(c);
      auto s = sums.row(c);
      for (std::size_t d = 0; d < dim; ++d) {
        dst[d] = s[d] / static_cast<double>(counts[c]);
      }
    }
    // Distances to the updated centroids, needed to pick re-seed points.
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = squared_distance(points.row(i), centroids.row(assign[i]));
    }
    for (std::size_t c = 0; c < opts.k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (dist[i] > dist[far]) far = i;
      }
      auto src = points.row(far);
      std::copy(src.begin(), src.end(), centroids.row(c).begin());
      dist[far] = 0.0;
    }
  }

  // Final distortion against the returned centroids.
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += nearest(centroids, points.row(i)).distance;
  }
  result.codebook.centroids = std::move(centroids);
  result.codebook.training_distortion = total / static_cast<double>(n);
  return result;
}

Codebook train_codebook(const Matrix& points, std::size_t k, std::uint64_t seed) {
  return kmeans(points, {.k = k, .seed = seed}).codebook;
}

Symbol nearest_centroid(const Codebook& cb, std::span<const double> frame) {
  if (frame.size() != cb.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "frame dimension " + std::to_string(frame.size()) +
                    " does not match codebook dimension " +
                    std::to_string(cb.dim()));
  }
  return static_cast<Symbol>(nearest(cb.centroids, frame).index);
}

SymbolSequence quantize(const Codebook& cb, const Matrix& frames) {
  if (frames.rows() > 0 && frames.cols() != cb.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "feature dimension " + std::to_string(frames.cols()) +
                    " does not match codebook dimension " +
                    std::to_string(cb.dim()));
  }
  SymbolSequence out(frames.rows());
  for (std::size_t t = 0; t < frames.rows(); ++t) {
    out[t] = static_cast<Symbol>(nearest(cb.centroids, frames.row(t)).index);
  }
  return out;
}

SymbolSequence quantize(const Codebook& cb, const FeatureMatrix& fm) {
  return quantize(cb, fm.frames);
}

}  // namespace hasr
