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

#ifndef HASR_HMM_H_
#define HASR_HMM_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hasr/matrix.h"
#include "hasr/vq.h"

namespace hasr {

// Discrete-observation HMM. a(i, j) is P(state j at t+1 | state i at t) and
// b(j, k) is P(symbol k | state j).
struct Hmm {
  std::vector<double> pi;
  Matrix a;
  Matrix b;

  std::size_t n_states() const { return pi.size(); }
  std::size_t n_symbols() const { return b.cols(); }

  friend bool operator==(const Hmm&, const Hmm&) = default;
};

// Every violated stochasticity invariant, one message per offending row or
// entry. An empty list means the model is valid.
std::vector<std::string> validate(const Hmm& h, double tol = 1e-9);

struct ForwardResult {
  Matrix alpha_hat;            // T x N, rows sum to 1
  std::vector<double> scales;  // scales[t] = sum of the unnormalized row t
  double log_likelihood = 0.0;  // sum of ln(scales[t])
};

// Scaled forward pass. Each frame is normalized to sum to one; the
// normalizers multiply out to P(O | model). Throws kSymbolOutOfRange and
// kZeroProbabilitySequence.
ForwardResult forward_scaled(const Hmm& h, const SymbolSequence& obs);

// Scaled backward pass matched to forward_scaled's scales:
// beta_hat[T-1](i) = 1 / scales[T-1],
// beta_hat[t](i) = sum_j a(i,j) b(j, o[t+1]) beta_hat[t+1](j) / scales[t].
Matrix backward_scaled(const Hmm& h, const SymbolSequence& obs,
                       const std::vector<double>& scales);

// State posteriors gamma[t](i) = alpha_hat[t](i) * beta_hat[t](i) * scales[t].
Matrix state_posteriors(const ForwardResult& fwd, const Matrix& beta_hat);

struct ViterbiResult {
  std::vector<std::size_t> path;
  double log_prob = 0.0;
};

// Log-space Viterbi. Ties resolve to the lowest state index, both for the
// final state and for every back-pointer.
ViterbiResult viterbi(const Hmm& h, const SymbolSequence& obs);

struct BaumWelchConfig {
  std::size_t max_iters = 40;
  double tol = 1e-4;
  double floor = 1e-6;
  // Called with the iteration number (from 1) and the re-estimated model.
  std::function<void(std::size_t, const Hmm&)> on_iteration;
};

struct BaumWelchResult {
  Hmm model;
  // history[0] is the total log-likelihood of the initial model and
  // history[i] the total after i re-estimations.
  std::vector<double> history;
  std::size_t iterations = 0;
};

// Multi-sequence Baum-Welch. Expected counts are pooled over all sequences
// before re-estimation. Entries that are exactly zero in h0 stay zero; every
// other entry of a and b is held at or above cfg.floor.
BaumWelchResult baum_welch(const Hmm& h0,
                           const std::vector<SymbolSequence>& sequences,
                           const BaumWelchConfig& cfg = {});

// Total log-likelihood over sequences (ZeroProbabilitySequence propagates).
double total_log_likelihood(const Hmm& h,
                            const std::vector<SymbolSequence>& sequences);

SymbolSequence sample(const Hmm& h, std::size_t t_len, std::uint64_t seed);

// Sum over every state path, by enumeration. Guarded to N^T <= 1e6.
double brute_force_likelihood(const Hmm& h, const SymbolSequence& obs);

// Left-right (Bakis) initial model: pi = e_0, a(i, j) uniform over
// j in [i, min(i + skip, N - 1)], last state absorbing, b uniform.
Hmm left_right_model(std::size_t n_states, std::size_t n_symbols,
                     std::size_t skip);

// Row-stochastic random model drawn from Rng(seed); used by tests and demos.
Hmm random_model(std::size_t n_states, std::size_t n_symbols,
                 std::uint64_t seed);

}  // namespace hasr

#endif  // HASR_HMM_H_
