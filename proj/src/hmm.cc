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

#include "hasr/hmm.h"

#include <cmath>
#include <cstdio>
#include <limits>

#include "hasr/error.h"
#include "hasr/random.h"

namespace hasr {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void check_observations(const Hmm& h, const SymbolSequence& obs) {
  if (obs.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "observation sequence is empty");
  }
  const std::size_t m = h.n_symbols();
  for (std::size_t t = 0; t < obs.size(); ++t) {
    if (obs[t] >= m) {
      throw Error(ErrorCode::kSymbolOutOfRange,
                  "symbol " + std::to_string(obs[t]) + " at t=" +
                      std::to_string(t) + " outside alphabet of size " +
                      std::to_string(m));
    }
  }
}

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

Matrix log_matrix(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.data().size(); ++i) {
    out.data()[i] = safe_log(m.data()[i]);
  }
  return out;
}

// Maximizes sum_k counts[k] * log(p[k]) over the entries allowed in `row`
// subject to sum p = 1 and p[k] >= floor: p[k] = max(floor, counts[k] / z).
// Entries pinned at the floor are found by repeated passes. A row with no
// expected counts keeps its previous values.
void reestimate_row(std::span<const double> counts,
                    std::span<const std::uint8_t> allowed, double floor,
                    std::span<double> row) {
  const std::size_t n = row.size();
  double total = 0.0;
  std::size_t n_allowed = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!allowed[k]) continue;
    total += counts[k];
    ++n_allowed;
  }
  if (!(total > 0.0) || n_allowed == 0) return;

  if (static_cast<double>(n_allowed) * floor >= 1.0) {
    for (std::size_t k = 0; k < n; ++k) {
      row[k] = allowed[k] ? 1.0 / static_cast<double>(n_allowed) : 0.0;
    }
    return;
  }

  std::vector<std::uint8_t> pinned(n, 0);
  std::size_t n_pinned = 0;
  for (;;) {
    double free_total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (allowed[k] && !pinned[k]) free_total += counts[k];
    }
    const double mass = 1.0 - static_cast<double>(n_pinned) * floor;
    bool grew = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (!allowed[k]) {
        row[k] = 0.0;
      } else if (pinned[k]) {
        row[k] = floor;
      } else {
        row[k] = free_total > 0.0 ? mass * counts[k] / free_total : 0.0;
        if (row[k] < floor) {
          pinned[k] = 1;
          ++n_pinned;
          grew = true;
        }
      }
    }
    if (!grew) break;
  }
}

struct Accumulators {
  std::vector<double> pi;
  Matrix a;
  Matrix b;
  double log_likelihood = 0.0;
};

Accumulators expected_counts(const Hmm& h,
                             const std::vector<SymbolSequence>& sequences) {
  const std::size_t n = h.n_states();
  Accumulators acc{std::vector<double>(n, 0.0), Matrix(n, n),
                   Matrix(n, h.n_symbols()), 0.0};
  for (const auto& obs : sequences) {
    const ForwardResult fwd = forward_scaled(h, obs);
    const Matrix beta = backward_scaled(h, obs, fwd.scales);
    const Matrix gamma = state_posteriors(fwd, beta);
    acc.log_likelihood += fwd.log_likelihood;
    for (std::size_t i = 0; i < n; ++i) acc.pi[i] += gamma(0, i);
    for (std::size_t t = 0; t < obs.size(); ++t) {
      for (std::size_t j = 0; j < n; ++j) acc.b(j, obs[t]) += gamma(t, j);
    }
    for (std::size_t t = 0; t + 1 < obs.size(); ++t) {
      const Symbol next = obs[t + 1];
      for (std::size_t i = 0; i < n; ++i) {
        const double ai = fwd.alpha_hat(t, i);
        if (ai == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
          acc.a(i, j) += ai * h.a(i, j) * h.b(j, next) * beta(t + 1, j);
        }
      }
    }
  }
  return acc;
}

}  // namespace

std::vector<std::string> validate(const Hmm& h, double tol) {
  std::vector<std::string> out;
  const std::size_t n = h.n_states();
  if (n == 0) out.push_back("model has no states");
  if (h.a.rows() != n || h.a.cols() != n) {
    out.push_back("a is " + std::to_string(h.a.rows()) + "x" +
                  std::to_string(h.a.cols()) + ", expected " +
                  std::to_string(n) + "x" + std::to_string(n));
  }
  if (h.b.rows() != n) {
    out.push_back("b has " + std::to_string(h.b.rows()) + " rows, expected " +
                  std::to_string(n));
  }
  if (h.b.cols() == 0) out.push_back("b has no symbols");
  if (!out.empty()) return out;

  auto check_entries = [&](const std::string& name, std::size_t r,
                           std::span<const double> row, bool is_pi) {
    double sum = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double p = row[c];
      const std::string where =
          is_pi ? name + "[" + std::to_string(c) + "]"
                : name + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
      if (!std::isfinite(p)) {
        out.push_back(where + " is not finite");
      } else if (p < 0.0) {
        out.push_back(where + " is negative (" + fmt_num(p) + ")");
      } else if (p > 1.0) {
        out.push_back(where + " exceeds 1 (" + fmt_num(p) + ")");
      }
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= tol)) {
      out.push_back(is_pi ? name + " sums to " + fmt_num(sum)
                          : name + " row " + std::to_string(r) + " sums to " +
                                fmt_num(sum));
    }
  };
  check_entries("pi", 0, h.pi, true);
  for (std::size_t i = 0; i < n; ++i) check_entries("a", i, h.a.row(i), false);
  for (std::size_t i = 0; i < n; ++i) check_entries("b", i, h.b.row(i), false);
  return out;
}

ForwardResult forward_scaled(const Hmm& h, const SymbolSequence& obs) {
  check_observations(h, obs);
  const std::size_t n = h.n_states();
  const std::size_t t_len = obs.size();
  ForwardResult r{Matrix(t_len, n), std::vector<double>(t_len, 0.0), 0.0};

  auto normalize = [&](std::size_t t) {
    auto row = r.alpha_hat.row(t);
    double s = 0.0;
    for (double v : row) s += v;
    if (!(s > 0.0)) {
      throw Error(ErrorCode::kZeroProbabilitySequence,
                  "observation prefix of length " + std::to_string(t + 1) +
                      " has probability zero under the model");
    }
    for (double& v : row) v /= s;
    r.scales[t] = s;
    r.log_likelihood += std::log(s);
  };

  for (std::size_t i = 0; i < n; ++i) {
    r.alpha_hat(0, i) = h.pi[i] * h.b(i, obs[0]);
  }
  normalize(0);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += r.alpha_hat(t - 1, i) * h.a(i, j);
      r.alpha_hat(t, j) = s * h.b(j, obs[t]);
    }
    normalize(t);
  }
  return r;
}

Matrix backward_scaled(const Hmm& h, const SymbolSequence& obs,
                       const std::vector<double>& scales) {
  check_observations(h, obs);
  const std::size_t n = h.n_states();
  const std::size_t t_len = obs.size();
  if (scales.size() != t_len) {
    throw Error(ErrorCode::kDimensionMismatch,
                "scales length " + std::to_string(scales.size()) +
                    " does not match sequence length " + std::to_string(t_len));
  }
  Matrix beta(t_len, n);
  for (std::size_t i = 0; i < n; ++i) beta(t_len - 1, i) = 1.0 / scales[t_len - 1];
  for (std::size_t t = t_len - 1; t-- > 0;) {
    const Symbol next = obs[t + 1];
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        s += h.a(i, j) * h.b(j, next) * beta(t + 1, j);
      }
      beta(t, i) = s / scales[t];
    }
  }
  return beta;
}

Matrix state_posteriors(const ForwardResult& fwd, const Matrix& beta_hat) {
  Matrix gamma(fwd.alpha_hat.rows(), fwd.alpha_hat.cols());
  for (std::size_t t = 0; t < gamma.rows(); ++t) {
    for (std::size_t i = 0; i < gamma.cols(); ++i) {
      gamma(t, i) = fwd.alpha_hat(t, i) * beta_hat(t, i) * fwd.scales[t];
    }
  }
  return gamma;
}

ViterbiResult viterbi(const Hmm& h, const SymbolSequence& obs) {
  check_observations(h, obs);
  const std::size_t n = h.n_states();
  const std::size_t t_len = obs.size();
  const Matrix log_a = log_matrix(h.a);
  const Matrix log_b = log_matrix(h.b);

  Matrix delta(t_len, n);
  std::vector<std::size_t> psi(t_len * n, 0);
  auto check_feasible = [&](std::size_t t) {
    for (std::size_t j = 0; j < n; ++j) {
      if (delta(t, j) > kNegInf) return;
    }
    throw Error(ErrorCode::kNoFeasiblePath,
                "no state path explains the first " + std::to_string(t + 1) +
                    " observations");
  };

  for (std::size_t i = 0; i < n; ++i) {
    delta(0, i) = safe_log(h.pi[i]) + log_b(i, obs[0]);
  }
  check_feasible(0);
  for (std::size_t t = 1; t < t_len; ++t) {
    for (std::size_t j = 0; j < n; ++j) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = delta(t - 1, i) + log_a(i, j);
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      delta(t, j) = best + log_b(j, obs[t]);
      psi[t * n + j] = arg;
    }
    check_feasible(t);
  }

  ViterbiResult r;
  r.path.assign(t_len, 0);
  std::size_t last = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (delta(t_len - 1, i) > delta(t_len - 1, last)) last = i;
  }
  r.log_prob = delta(t_len - 1, last);
  r.path[t_len - 1] = last;
  for (std::size_t t = t_len - 1; t > 0; --t) {
    r.path[t - 1] = psi[t * n + r.path[t]];
  }
  return r;
}

double total_log_likelihood(const Hmm& h,
                            const std::vector<SymbolSequence>& sequences) {
  double total = 0.0;
  for (const auto& obs : sequences) total += forward_scaled(h, obs).log_likelihood;
  return total;
}

BaumWelchResult baum_welch(const Hmm& h0,
                           const std::vector<SymbolSequence>& sequences,
                           const BaumWelchConfig& cfg) {
  if (sequences.empty()) {
    throw Error(ErrorCode::kInsufficientData, "baum_welch needs at least one sequence");
  }
  if (auto problems = validate(h0); !problems.empty()) {
    throw Error(ErrorCode::kInvalidModel, "initial model invalid: " + problems.front());
  }
  const std::size_t n = h0.n_states();
  const std::size_t m = h0.n_symbols();

  // Structural support, fixed by the initial model.
  std::vector<std::uint8_t> a_allowed(n * n), b_allowed(n * m);
  for (std::size_t i = 0; i < n * n; ++i) a_allowed[i] = h0.a.data()[i] != 0.0;
  for (std::size_t i = 0; i < n * m; ++i) b_allowed[i] = h0.b.data()[i] != 0.0;

  BaumWelchResult result{h0, {}, 0};
  for (;;) {
    Accumulators acc = expected_counts(result.model, sequences);
    result.history.push_back(acc.log_likelihood);
    const std::size_t len = result.history.size();
    if (len > 1 && result.history[len - 1] - result.history[len - 2] < cfg.tol) break;
    if (result.iterations >= cfg.max_iters) break;

    Hmm& model = result.model;
    double pi_total = 0.0;
    for (double v : acc.pi) pi_total += v;
    for (std::size_t i = 0; i < n; ++i) model.pi[i] = acc.pi[i] / pi_total;
    for (std::size_t i = 0; i < n; ++i) {
      reestimate_row(acc.a.row(i), std::span(a_allowed).subspan(i * n, n),
                     cfg.floor, model.a.row(i));
      reestimate_row(acc.b.row(i), std::span(b_allowed).subspan(i * m, m),
                     cfg.floor, model.b.row(i));
    }
    ++result.iterations;
    if (cfg.on_iteration) cfg.on_iteration(result.iterations, model);
  }
  return result;
}

SymbolSequence sample(const Hmm& h, std::size_t t_len, std::uint64_t seed) {
  Rng rng(seed);
  SymbolSequence out;
  out.reserve(t_len);
  std::size_t state = rng.categorical(h.pi);
  for (std::size_t t = 0; t < t_len; ++t) {
    if (t > 0) state = rng.categorical(h.a.row(state));
    out.push_back(static_cast<Symbol>(rng.categorical(h.b.row(state))));
  }
  return out;
}

double brute_force_likelihood(const Hmm& h, const SymbolSequence& obs) {
  check_observations(h, obs);
  const std::size_t n = h.n_states();
  const std::size_t t_len = obs.size();
  double paths = 1.0;
  for (std::size_t t = 0; t < t_len; ++t) paths *= static_cast<double>(n);
  if (paths > 1e6) {
    throw Error(ErrorCode::kTooLarge,
                "enumeration of " + fmt_num(paths) + " paths exceeds 1e6");
  }
  std::vector<std::size_t> path(t_len, 0);
  double total = 0.0;
  for (;;) {
    double p = h.pi[path[0]] * h.b(path[0], obs[0]);
    for (std::size_t t = 1; t < t_len; ++t) {
      p *= h.a(path[t - 1], path[t]) * h.b(path[t], obs[t]);
    }
    total += p;
    std::size_t t = 0;
    while (t < t_len && ++path[t] == n) path[t++] = 0;
    if (t == t_len) break;
  }
  return total;
}

Hmm left_right_model(std::size_t n_states, std::size_t n_symbols,
                     std::size_t skip) {
  Hmm h{std::vector<double>(n_states, 0.0), Matrix(n_states, n_states),
        Matrix(n_states, n_symbols, 1.0 / static_cast<double>(n_symbols))};
  h.pi[0] = 1.0;
  for (std::size_t i = 0; i < n_states; ++i) {
    const std::size_t last = std::min(i + skip, n_states - 1);
    const double p = 1.0 / static_cast<double>(last - i + 1);
    for (std::size_t j = i; j <= last; ++j) h.a(i, j) = p;
  }
  return h;
}

Hmm random_model(std::size_t n_states, std::size_t n_symbols,
                 std::uint64_t seed) {
  Rng rng(seed);
  auto fill = [&rng](std::span<double> row) {
    double s = 0.0;
    for (double& v : row) {
      v = rng.uniform(0.05, 1.0);
      s += v;
    }
    for (double& v : row) v /= s;
  };
  Hmm h{std::vector<double>(n_states), Matrix(n_states, n_states),
        Matrix(n_states, n_symbols)};
  fill(h.pi);
  for (std::size_t i = 0; i < n_states; ++i) {
    fill(h.a.row(i));
    fill(h.b.row(i));
  }
  return h;
}

}  // namespace hasr
