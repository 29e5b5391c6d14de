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
#include <numbers>
#include <string>

#include "hasr/error.h"
#include "hasr/matrix.h"
#include "hasr/random.h"

namespace hasr {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::kMissingWordDirectory: return "MissingWordDirectory";
    case ErrorCode::kEmptyWordDirectory: return "EmptyWordDirectory";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kClipTooShort: return "ClipTooShort";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSymbolOutOfRange: return "SymbolOutOfRange";
    case ErrorCode::kZeroProbabilitySequence: return "ZeroProbabilitySequence";
    case ErrorCode::kNoFeasiblePath: return "NoFeasiblePath";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kOversizeFrame: return "OversizeFrame";
    case ErrorCode::kInvalidUtf8: return "InvalidUtf8";
    case ErrorCode::kInvalidMessage: return "InvalidMessage";
    case ErrorCode::kConnectFailed: return "ConnectFailed";
    case ErrorCode::kBindFailed: return "BindFailed";
    case ErrorCode::kUnknownAudio: return "UnknownAudio";
    case ErrorCode::kBackendFailure: return "BackendFailure";
  }
  return "Unknown";
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "ragged matrix: row " + std::to_string(r) + " has " +
                      std::to_string(rows[r].size()) + " columns, expected " +
                      std::to_string(m.cols()));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto src = row(r);
    out[r].assign(src.begin(), src.end());
  }
  return out;
}

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double target = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  // Rounding can leave target == acc at the end of the scan.
  return last_positive;
}

}  // namespace hasr
