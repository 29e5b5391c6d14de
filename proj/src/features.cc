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

#include "hasr/features.h"

#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "hasr/digest.h"
#include "hasr/error.h"

namespace hasr {
namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

// n_mel + 2 filter edge frequencies, equally spaced in mel.
std::vector<double> mel_edges(const FeatureConfig& cfg, int sample_rate) {
  const double lo = hz_to_mel(0.0);
  const double hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(cfg.n_mel + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) /
                                  static_cast<double>(cfg.n_mel + 1));
  }
  return edges;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

// FFTW planning is not thread-safe, execution with fresh arrays is. Plans are
// created once per size under a lock and never destroyed.
fftw_plan r2c_plan(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n);
  if (it != plans.end()) return it->second;
  FftwBuffer<double> in(fftw_alloc_real(n));
  FftwBuffer<fftw_complex> out(fftw_alloc_complex(n / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(),
                                        out.get(), FFTW_ESTIMATE);
  plans.emplace(n, plan);
  return plan;
}

class SpectrumWorkspace {
 public:
  explicit SpectrumWorkspace(std::size_t fft_size)
      : n_(fft_size),
        plan_(r2c_plan(fft_size)),
        in_(fftw_alloc_real(fft_size)),
        out_(fftw_alloc_complex(fft_size / 2 + 1)) {}

  // Writes |X[k]|^2 into `power` (size n/2+1).
  void power(std::span<const double> frame, std::span<double> power) {
    std::size_t m = std::min(frame.size(), n_);
    std::copy_n(frame.begin(), m, in_.get());
    std::fill(in_.get() + m, in_.get() + n_, 0.0);
    fftw_execute_dft_r2c(plan_, in_.get(), out_.get());
    for (std::size_t k = 0; k <= n_ / 2; ++k) {
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }
  }

 private:
  std::size_t n_;
  fftw_plan plan_;
  FftwBuffer<double> in_;
  FftwBuffer<fftw_complex> out_;
};

std::vector<double> hamming(std::size_t len) {
  std::vector<double> w(len, 1.0);
  if (len < 2) return w;
  for (std::size_t n = 0; n < len; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                  static_cast<double>(len - 1));
  }
  return w;
}

// Orthonormal DCT-II basis, n_ceps x n_mel.
Matrix dct_basis(std::size_t n_ceps, std::size_t n_mel) {
  Matrix d(n_ceps, n_mel);
  const double m = static_cast<double>(n_mel);
  for (std::size_t k = 0; k < n_ceps; ++k) {
    const double s = k == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
    for (std::size_t j = 0; j < n_mel; ++j) {
      d(k, j) = s * std::cos(std::numbers::pi * static_cast<double>(k) *
                             (static_cast<double>(j) + 0.5) / m);
    }
  }
  return d;
}

std::vector<double> preemphasize(std::span<const double> x, double coef) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  y[0] = x[0];
  for (std::size_t n = 1; n < x.size(); ++n) y[n] = x[n] - coef * x[n - 1];
  return y;
}

}  // namespace

void FeatureConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, "feature config: " + what);
  };
  if (frame_len == 0) fail("frame_len must be positive");
  if (hop == 0) fail("hop must be positive");
  if (frame_len > fft_size) fail("frame_len exceeds fft_size");
  if (fft_size < 2 || fft_size % 2 != 0) fail("fft_size must be even");
  if (n_ceps == 0 || n_ceps > n_mel) fail("need 0 < n_ceps <= n_mel");
  if (!(preemphasis >= 0.0 && preemphasis < 1.0)) fail("need 0 <= preemphasis < 1");
  if (!(log_floor > 0.0)) fail("log_floor must be positive");
}

std::string FeatureConfig::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "frame_len=%zu;hop=%zu;fft_size=%zu;n_mel=%zu;n_ceps=%zu;"
                "preemphasis=%.17g;cmn=%d;log_floor=%.17g",
                frame_len, hop, fft_size, n_mel, n_ceps, preemphasis,
                cmn ? 1 : 0, log_floor);
  return sha256_hex(std::string_view(buf)).substr(0, 16);
}

std::size_t num_frames(std::size_t n, const FeatureConfig& cfg) {
  if (n < cfg.frame_len) return 0;
  return 1 + (n - cfg.frame_len) / cfg.hop;
}

Matrix mel_filterbank(const FeatureConfig& cfg, int sample_rate) {
  const std::size_t bins = cfg.fft_size / 2 + 1;
  const auto edges = mel_edges(cfg, sample_rate);
  Matrix fb(cfg.n_mel, bins);
  for (std::size_t m = 0; m < cfg.n_mel; ++m) {
    const double lo = edges[m], c = edges[m + 1], hi = edges[m + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate /
                       static_cast<double>(cfg.fft_size);
      if (f > lo && f <= c) {
        fb(m, k) = (f - lo) / (c - lo);
      } else if (f > c && f < hi) {
        fb(m, k) = (hi - f) / (hi - c);
      }
    }
  }
  return fb;
}

std::vector<double> mel_centers(const FeatureConfig& cfg, int sample_rate) {
  auto edges = mel_edges(cfg, sample_rate);
  return {edges.begin() + 1, edges.end() - 1};
}

std::vector<double> power_spectrum(std::span<const double> frame,
                                   std::size_t fft_size) {
  SpectrumWorkspace ws(fft_size);
  std::vector<double> p(fft_size / 2 + 1);
  ws.power(frame, p);
  return p;
}

Matrix filterbank_energies(const AudioClip& clip, const FeatureConfig& cfg) {
  cfg.validate();
  const std::size_t n = clip.samples.size();
  if (n < cfg.frame_len) {
    throw Error(ErrorCode::kClipTooShort,
                "clip has " + std::to_string(n) + " samples, need at least " +
                    std::to_string(cfg.frame_len));
  }
  const std::size_t t_frames = num_frames(n, cfg);
  const auto y = preemphasize(clip.samples, cfg.preemphasis);
  const auto window = hamming(cfg.frame_len);
  const Matrix fb = mel_filterbank(cfg, clip.sample_rate);
  const std::size_t bins = cfg.fft_size / 2 + 1;

  SpectrumWorkspace ws(cfg.fft_size);
  std::vector<double> frame(cfg.frame_len);
  std::vector<double> power(bins);
  Matrix energies(t_frames, cfg.n_mel);
  for (std::size_t t = 0; t < t_frames; ++t) {
    const std::size_t start = t * cfg.hop;
    for (std::size_t i = 0; i < cfg.frame_len; ++i) {
      frame[i] = y[start + i] * window[i];
    }
    ws.power(frame, power);
    for (std::size_t m = 0; m < cfg.n_mel; ++m) {
      auto weights = fb.row(m);
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += weights[k] * power[k];
      energies(t, m) = e;
    }
  }
  return energies;
}

FeatureMatrix mfcc(const AudioClip& clip, const FeatureConfig& cfg) {
  const Matrix energies = filterbank_energies(clip, cfg);
  const Matrix dct = dct_basis(cfg.n_ceps, cfg.n_mel);

  FeatureMatrix fm;
  fm.frames = Matrix(energies.rows(), cfg.n_ceps);
  fm.frame_rate = static_cast<double>(clip.sample_rate) / static_cast<double>(cfg.hop);
  fm.config_hash = cfg.hash();

  std::vector<double> log_e(cfg.n_mel);
  for (std::size_t t = 0; t < energies.rows(); ++t) {
    for (std::size_t m = 0; m < cfg.n_mel; ++m) {
      log_e[m] = std::log(std::max(energies(t, m), cfg.log_floor));
    }
    for (std::size_t k = 0; k < cfg.n_ceps; ++k) {
      auto basis = dct.row(k);
      double c = 0.0;
      for (std::size_t m = 0; m < cfg.n_mel; ++m) c += basis[m] * log_e[m];
      fm.frames(t, k) = c;
    }
  }
  if (cfg.cmn) fm = cmn(std::move(fm));
  return fm;
}

FeatureMatrix cmn(FeatureMatrix fm) {
  Matrix& x = fm.frames;
  const std::size_t t_frames = x.rows();
  if (t_frames == 0) return fm;
  for (std::size_t d = 0; d < x.cols(); ++d) {
    // Shifted by the first frame so identical columns give an exact mean.
    const double origin = x(0, d);
    double acc = 0.0;
    for (std::size_t t = 0; t < t_frames; ++t) acc += x(t, d) - origin;
    const double mean = origin + acc / static_cast<double>(t_frames);
    for (std::size_t t = 0; t < t_frames; ++t) x(t, d) -= mean;
  }
  return fm;
}

}  // namespace hasr
