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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "hasr/error.h"
#include "hasr/hmm.h"
#include "hasr/random.h"
#include "test_util.h"

namespace hasr {
namespace {

using testing::enumerate_best_path;
using testing::enumerate_likelihood;

Hmm single_state() {
  return Hmm{{1.0}, Matrix::from_rows({{1.0}}), Matrix::from_rows({{0.3, 0.7}})};
}

SymbolSequence random_obs(Rng& rng, std::size_t len, std::size_t m) {
  SymbolSequence o(len);
  for (auto& v : o) v = static_cast<Symbol>(rng.index(m));
  return o;
}

bool contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

TEST_SUITE("hmm") {
  TEST_CASE("validate") {
    const Hmm uniform{{0.5, 0.5}, Matrix(2, 2, 0.5), Matrix(2, 2, 0.5)};
    CHECK(validate(uniform).empty());

    Hmm bad_row = uniform;
    bad_row.a(0, 1) = 0.4;
    CHECK(contains(validate(bad_row), "row 0 sums to 0.9"));

    Hmm bad_pi = uniform;
    bad_pi.pi = {1.5, -0.5};
    const auto problems = validate(bad_pi);
    CHECK(contains(problems, "pi[1] is negative"));
  }

  TEST_CASE("forward: single state product") {
    const auto f = forward_scaled(single_state(), {1, 1, 0});
    CHECK(f.log_likelihood == doctest::Approx(std::log(0.147)).epsilon(1e-12));
    CHECK(brute_force_likelihood(single_state(), {1, 1, 0}) == doctest::Approx(0.147));
  }

  TEST_CASE("forward: T = 1 is sum of pi times b") {
    const Hmm h = random_model(3, 4, 12);
    for (Symbol k = 0; k < 4; ++k) {
      double expected = 0.0;
      for (std::size_t i = 0; i < 3; ++i) expected += h.pi[i] * h.b(i, k);
      CHECK(std::exp(forward_scaled(h, {k}).log_likelihood) ==
            doctest::Approx(expected).epsilon(1e-12));
      CHECK(brute_force_likelihood(h, {k}) == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("forward matches path enumeration") {
    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
      const Hmm h = random_model(3, 4, 1000 + trial);
      const SymbolSequence obs = random_obs(rng, 6, 4);
      const double oracle = enumerate_likelihood(h, obs);
      const auto f = forward_scaled(h, obs);
      CHECK(std::abs(std::exp(f.log_likelihood) - oracle) <= 1e-10 * oracle);
      CHECK(std::abs(brute_force_likelihood(h, obs) - oracle) <= 1e-10 * oracle);
      for (std::size_t t = 0; t < obs.size(); ++t) {
        double s = 0.0;
        for (std::size_t i = 0; i < 3; ++i) s += f.alpha_hat(t, i);
        CHECK(std::abs(s - 1.0) < 1e-9);
        CHECK(f.scales[t] > 0.0);
      }
    }
  }

  TEST_CASE("forward errors") {
    const Hmm h = random_model(2, 3, 1);
    CHECK_THROWS_AS(forward_scaled(h, {}), Error);
    try {
      forward_scaled(h, {0, 3});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kSymbolOutOfRange);
    }
    Hmm zero = single_state();
    zero.b = Matrix::from_rows({{1.0, 0.0}});
    try {
      forward_scaled(zero, {0, 1});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kZeroProbabilitySequence);
    }
    CHECK_THROWS_AS(brute_force_likelihood(random_model(4, 2, 1), SymbolSequence(10, 0)), Error);
  }

  TEST_CASE("backward base case and single state") {
    const Hmm h = random_model(3, 4, 5);
    const auto f = forward_scaled(h, {2});
    const Matrix beta = backward_scaled(h, {2}, f.scales);
    for (std::size_t i = 0; i < 3; ++i) CHECK(beta(0, i) == doctest::Approx(1.0 / f.scales[0]));

    const SymbolSequence obs = {0, 1, 1, 0, 1};
    const auto f1 = forward_scaled(single_state(), obs);
    const Matrix gamma = state_posteriors(f1, backward_scaled(single_state(), obs, f1.scales));
    for (std::size_t t = 0; t < obs.size(); ++t) CHECK(gamma(t, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("backward recovers suffix sums") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 3, m = 4, len = 6;
      const Hmm h = random_model(n, m, 500 + trial);
      const SymbolSequence obs = random_obs(rng, len, m);
      const auto f = forward_scaled(h, obs);
      const Matrix beta_hat = backward_scaled(h, obs, f.scales);
      for (std::size_t t = 0; t < len; ++t) {
        // beta_t(i) = P(o[t+1..] | q_t = i), by enumeration over the suffix.
        const SymbolSequence suffix(obs.begin() + static_cast<long>(t) + 1, obs.end());
        double scale_product = 1.0;
        for (std::size_t u = t; u < len; ++u) scale_product *= f.scales[u];
        for (std::size_t i = 0; i < n; ++i) {
          double oracle = 1.0;
          if (!suffix.empty()) {
            Hmm from_i = h;
            // Start in i, take one transition, then emit the suffix.
            for (std::size_t j = 0; j < n; ++j) from_i.pi[j] = h.a(i, j);
            oracle = enumerate_likelihood(from_i, suffix);
          }
          const double recovered = beta_hat(t, i) * scale_product;
          CHECK(std::abs(recovered - oracle) <= 1e-10 * oracle);
        }
      }
    }
  }

  TEST_CASE("gamma rows sum to one") {
    Rng rng(17);
    const Hmm h = random_model(4, 5, 3);
    const SymbolSequence obs = random_obs(rng, 50, 5);
    const auto f = forward_scaled(h, obs);
    const Matrix g = state_posteriors(f, backward_scaled(h, obs, f.scales));
    for (std::size_t t = 0; t < obs.size(); ++t) {
      double s = 0.0;
      for (std::size_t i = 0; i < 4; ++i) s += g(t, i);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("viterbi forced path") {
    const Hmm h{{1.0, 0.0},
                Matrix::from_rows({{0.0, 1.0}, {0.0, 1.0}}),
                Matrix::from_rows({{0.9, 0.1}, {0.2, 0.8}})};
    const ViterbiResult v = viterbi(h, {0, 1});
    CHECK(v.path == std::vector<std::size_t>{0, 1});
    CHECK(v.log_prob == doctest::Approx(std::log(0.9) + std::log(1.0) + std::log(0.8)));
  }

  TEST_CASE("viterbi single state equals forward") {
    const SymbolSequence obs = {1, 0, 0, 1, 1};
    const ViterbiResult v = viterbi(single_state(), obs);
    CHECK(v.path == std::vector<std::size_t>(5, 0));
    CHECK(v.log_prob == doctest::Approx(forward_scaled(single_state(), obs).log_likelihood));
  }

  TEST_CASE("viterbi matches enumeration") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const Hmm h = random_model(3, 4, 2000 + trial);
      const SymbolSequence obs = random_obs(rng, 5, 4);
      double best = 0.0;
      const auto oracle = enumerate_best_path(h, obs, &best);
      const ViterbiResult v = viterbi(h, obs);
      CHECK(v.path == oracle);
      CHECK(v.log_prob == doctest::Approx(best).epsilon(1e-12));
    }
  }

  TEST_CASE("viterbi ties go to the lowest index") {
    const Hmm h{{0.5, 0.5}, Matrix(2, 2, 0.5), Matrix(2, 2, 0.5)};
    const ViterbiResult v = viterbi(h, {0, 1, 0});
    CHECK(v.path == std::vector<std::size_t>{0, 0, 0});
    CHECK(v.path == enumerate_best_path(h, {0, 1, 0}));
  }

  TEST_CASE("viterbi with no feasible path") {
    Hmm h = single_state();
    h.b = Matrix::from_rows({{1.0, 0.0}});
    CHECK_THROWS_AS(viterbi(h, {1}), Error);
  }

  TEST_CASE("baum-welch: one state learns frequencies") {
    BaumWelchConfig cfg;
    cfg.max_iters = 1;
    const Hmm h0{{1.0}, Matrix::from_rows({{1.0}}), Matrix::from_rows({{0.3, 0.7}})};
    const auto r = baum_welch(h0, {{0, 1, 1, 0}}, cfg);
    CHECK(r.iterations == 1);
    CHECK(r.model.b(0, 0) == doctest::Approx(0.5));
    CHECK(r.model.b(0, 1) == doctest::Approx(0.5));
    CHECK(r.model.pi == std::vector<double>{1.0});
    CHECK(r.model.a(0, 0) == 1.0);
  }

  TEST_CASE("baum-welch: zero iterations is the identity") {
    const Hmm h = random_model(3, 4, 8);
    std::vector<SymbolSequence> seqs;
    for (int i = 0; i < 5; ++i) seqs.push_back(sample(h, 20, 40 + i));
    BaumWelchConfig cfg;
    cfg.max_iters = 0;
    const auto r = baum_welch(h, seqs, cfg);
    CHECK(r.model == h);
    CHECK(r.history.size() == 1);
  }

  TEST_CASE("baum-welch is monotone and keeps structure") {
    const Hmm truth{{1.0, 0.0, 0.0},
                    Matrix::from_rows({{0.8, 0.2, 0.0}, {0.0, 0.7, 0.3}, {0.0, 0.0, 1.0}}),
                    Matrix::from_rows({{0.7, 0.2, 0.1, 0.0},
                                       {0.1, 0.6, 0.2, 0.1},
                                       {0.0, 0.1, 0.2, 0.7}})};
    std::vector<SymbolSequence> seqs;
    for (int i = 0; i < 20; ++i) seqs.push_back(sample(truth, 30, 100 + i));
    Hmm h0 = left_right_model(3, 4, 1);
    Rng rng(3);
    for (std::size_t i = 0; i < 3; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += (h0.b(i, k) = 0.5 + rng.uniform());
      for (std::size_t k = 0; k < 4; ++k) h0.b(i, k) /= s;
    }
    BaumWelchConfig cfg;
    cfg.max_iters = 30;
    cfg.tol = 0.0;
    std::size_t calls = 0;
    cfg.on_iteration = [&](std::size_t, const Hmm& m) {
      ++calls;
      CHECK(validate(m).empty());
    };
    const auto r = baum_welch(h0, seqs, cfg);
    CHECK(calls == r.iterations);
    for (std::size_t i = 1; i < r.history.size(); ++i) {
      CHECK(r.history[i] >= r.history[i - 1] - 1e-9);
    }
    CHECK(r.history.back() >= r.history.front());
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        if (h0.a(i, j) == 0.0) CHECK(r.model.a(i, j) == 0.0);
        else CHECK(r.model.a(i, j) >= cfg.floor);
      }
      for (std::size_t k = 0; k < 4; ++k) CHECK(r.model.b(i, k) >= cfg.floor);
    }
  }

  TEST_CASE("sample: forced and degenerate models") {
    const Hmm cycle{{1.0, 0.0},
                    Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}}),
                    Matrix::from_rows({{0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}})};
    CHECK(sample(cycle, 5, 1) == SymbolSequence{1, 2, 1, 2, 1});
    const Hmm zeros{{1.0}, Matrix::from_rows({{1.0}}), Matrix::from_rows({{1.0, 0.0}})};
    CHECK(sample(zeros, 8, 2) == SymbolSequence(8, 0));
  }

  TEST_CASE("sample: initial state frequency") {
    const Hmm h{{0.25, 0.75}, Matrix(2, 2, 0.5), Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}})};
    std::size_t zeros = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) zeros += sample(h, 1, s)[0] == 0;
    CHECK(std::abs(zeros / 10000.0 - 0.25) <= 0.02);
  }

  TEST_CASE("long sequences stay finite") {
    const Hmm h = random_model(5, 6, 77);
    const SymbolSequence obs = sample(h, 1000, 78);
    CHECK(testing::naive_forward(h, obs) == 0.0);
    const auto f = forward_scaled(h, obs);
    CHECK(std::isfinite(f.log_likelihood));
    CHECK(std::isfinite(viterbi(h, obs).log_prob));
  }

  TEST_CASE("left-right model") {
    const Hmm h = left_right_model(5, 8, 2);
    CHECK(validate(h).empty());
    CHECK(h.a(0, 0) == doctest::Approx(1.0 / 3));
    CHECK(h.a(0, 3) == 0.0);
    CHECK(h.a(3, 4) == 0.5);
    CHECK(h.a(4, 4) == 1.0);
    CHECK(h.a(2, 1) == 0.0);
  }
}

}  // namespace
}  // namespace hasr
