// Copyright 2026 The KMN-VOS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kmn/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "kmn/error.hpp"
#include "kmn/parallel.hpp"

namespace kmn {
namespace {

void require_finite(std::span<const double> data, const char* what) {
  for (double v : data)
    if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, std::string(what) + ": non-finite entry");
}

void require_length(std::size_t got, std::size_t want, const std::string& shape) {
  if (got != want)
    fail(ErrorCode::ShapeMismatch, "data length " + std::to_string(got) + " does not match shape " + shape);
}

std::string dims(std::initializer_list<std::size_t> d) {
  std::string s = "(";
  bool first = true;
  for (auto v : d) {
    if (!first) s += ", ";
    s += std::to_string(v);
    first = false;
  }
  return s + ")";
}

void check_correlation_inputs(const Grid4& km, const Grid3& kq) {
  if (km.depth() != kq.depth() || km.height() != kq.height() || km.width() != kq.width())
    fail(ErrorCode::ShapeMismatch,
         "memory keys " + km.shape_string() + " incompatible with query keys " + kq.shape_string());
  if (km.cells() == 0 || kq.cells() == 0) fail(ErrorCode::InvalidArgument, "empty key grid");
}

}  // namespace

Grid3::Grid3(std::size_t h, std::size_t w, std::size_t d) : h_(h), w_(w), d_(d), data_(h * w * d, 0.0) {}

Grid3::Grid3(std::size_t h, std::size_t w, std::size_t d, std::vector<double> data)
    : h_(h), w_(w), d_(d), data_(std::move(data)) {
  require_length(data_.size(), h * w * d, shape_string());
  require_finite(data_, "Grid3");
}

std::string Grid3::shape_string() const { return dims({h_, w_, d_}); }

Grid4::Grid4(std::size_t t, std::size_t h, std::size_t w, std::size_t d)
    : t_(t), h_(h), w_(w), d_(d), data_(t * h * w * d, 0.0) {}

Grid4::Grid4(std::size_t t, std::size_t h, std::size_t w, std::size_t d, std::vector<double> data)
    : t_(t), h_(h), w_(w), d_(d), data_(std::move(data)) {
  require_length(data_.size(), t * h * w * d, shape_string());
  require_finite(data_, "Grid4");
}

std::string Grid4::shape_string() const { return dims({t_, h_, w_, d_}); }

CorrelationMap::CorrelationMap(std::size_t t, std::size_t h, std::size_t w)
    : t_(t), h_(h), w_(w), data_(t * h * w * h * w, 0.0) {}

CorrelationMap::CorrelationMap(std::size_t t, std::size_t h, std::size_t w, std::vector<double> data)
    : t_(t), h_(h), w_(w), data_(std::move(data)) {
  require_length(data_.size(), t * h * w * h * w, dims({t, h, w, h, w}));
  require_finite(data_, "CorrelationMap");
}

std::vector<double> softmax_scaled(std::span<const double> scores, double scale) {
  if (scores.empty()) fail(ErrorCode::InvalidArgument, "empty softmax domain");
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorCode::InvalidArgument, "softmax scale must be positive");
  require_finite(scores, "softmax");
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s * scale);
  std::vector<double> out(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] * scale - m);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

QueryPos argmax2d(std::span<const double> slice, std::size_t h, std::size_t w) {
  if (slice.empty() || h == 0 || w == 0) fail(ErrorCode::InvalidArgument, "argmax of empty slice");
  if (slice.size() != h * w) fail(ErrorCode::ShapeMismatch, "argmax slice length does not match h*w");
  require_finite(slice, "argmax");
  std::size_t best = 0;
  for (std::size_t i = 1; i < slice.size(); ++i)
    if (slice[i] > slice[best]) best = i;
  return {static_cast<int>(best / w), static_cast<int>(best % w)};
}

CorrelationMap correlate_naive(const Grid4& km, const Grid3& kq) {
  check_correlation_inputs(km, kq);
  const std::size_t T = km.frames(), H = km.height(), W = km.width(), D = km.depth();
  CorrelationMap c(T, H, W);
  auto out = c.data();
  std::size_t idx = 0;
  for (std::size_t pt = 0; pt < T; ++pt)
    for (std::size_t py = 0; py < H; ++py)
      for (std::size_t px = 0; px < W; ++px)
        for (std::size_t qy = 0; qy < H; ++qy)
          for (std::size_t qx = 0; qx < W; ++qx) {
            double s = 0.0;
            for (std::size_t d = 0; d < D; ++d) s += km(pt, py, px, d) * kq(qy, qx, d);
            out[idx++] = s;
          }
  return c;
}

CorrelationMap correlate_fast(const Grid4& km, const Grid3& kq) {
  check_correlation_inputs(km, kq);
  constexpr std::size_t kRows = 4;
  constexpr std::size_t kCols = 64;

  const std::size_t P = km.cells();
  const std::size_t Q = kq.cells();
  const std::size_t D = km.depth();

  // Channel-major copy of the query keys so the inner loop streams over q.
  std::vector<double> qt(D * Q);
  for (std::size_t q = 0; q < Q; ++q)
    for (std::size_t d = 0; d < D; ++d) qt[d * Q + q] = kq.data()[q * D + d];

  CorrelationMap c(km.frames(), km.height(), km.width());
  double* out = c.data().data();
  const double* mem = km.data().data();
  const std::size_t row_blocks = (P + kRows - 1) / kRows;

  parallel_for(
      row_blocks,
      [&](std::size_t b0, std::size_t b1) {
        std::array<double, kRows * kCols> acc;
        for (std::size_t b = b0; b < b1; ++b) {
          const std::size_t p0 = b * kRows;
          const std::size_t rows = std::min(kRows, P - p0);
          for (std::size_t q0 = 0; q0 < Q; q0 += kCols) {
            const std::size_t cols = std::min(kCols, Q - q0);
            acc.fill(0.0);
            for (std::size_t d = 0; d < D; ++d) {
              const double* qrow = qt.data() + d * Q + q0;
              for (std::size_t i = 0; i < rows; ++i) {
                const double m = mem[(p0 + i) * D + d];
                double* a = acc.data() + i * kCols;
                for (std::size_t j = 0; j < cols; ++j) a[j] += m * qrow[j];
              }
            }
            for (std::size_t i = 0; i < rows; ++i)
              std::copy_n(acc.data() + i * kCols, cols, out + (p0 + i) * Q + q0);
          }
        }
      },
      4);
  return c;
}

}  // namespace kmn
