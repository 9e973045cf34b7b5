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

#include "kmn/encoder.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "kmn/error.hpp"
#include "kmn/parallel.hpp"

namespace kmn {
namespace {

void check_divisible(std::size_t w, std::size_t h, std::size_t stride) {
  if (w < stride || h < stride || w % stride != 0 || h % stride != 0)
    fail(ErrorCode::InvalidArgument, "image " + std::to_string(w) + "x" + std::to_string(h) +
                                         " is not divisible by stride " + std::to_string(stride));
}

std::array<double, kDescriptorFeatures> describe_cell(const Image& img, std::size_t x0, std::size_t y0,
                                                      std::size_t s) {
  const std::size_t half = s / 2;
  const double n = static_cast<double>(s * s);
  auto intensity = [&](std::size_t x, std::size_t y) {
    return (img.at(x, y, 0) + img.at(x, y, 1) + img.at(x, y, 2)) / (3.0 * 255.0);
  };

  double sum_r = 0, sum_g = 0, sum_b = 0, sum_i = 0, sum_i2 = 0, grad_x = 0, grad_y = 0;
  double lo = 1.0, hi = 0.0;
  std::array<double, 4> quad{};
  std::array<double, 4> quad_n{};
  for (std::size_t y = y0; y < y0 + s; ++y)
    for (std::size_t x = x0; x < x0 + s; ++x) {
      sum_r += img.at(x, y, 0) / 255.0;
      sum_g += img.at(x, y, 1) / 255.0;
      sum_b += img.at(x, y, 2) / 255.0;
      const double i = intensity(x, y);
      sum_i += i;
      sum_i2 += i * i;
      lo = std::min(lo, i);
      hi = std::max(hi, i);
      const std::size_t qi = (y - y0 >= half ? 2 : 0) + (x - x0 >= half ? 1 : 0);
      quad[qi] += i;
      quad_n[qi] += 1;
      if (x + 1 < x0 + s) grad_x += std::abs(intensity(x + 1, y) - i);
      if (y + 1 < y0 + s) grad_y += std::abs(intensity(x, y + 1) - i);
    }
  const double pairs = static_cast<double>(s * (s - 1));
  const double mean_i = sum_i / n;
  const double var = std::max(0.0, sum_i2 / n - mean_i * mean_i);
  return {sum_r / n,           sum_g / n,           sum_b / n,           std::sqrt(var),
          grad_x / pairs,      grad_y / pairs,      quad[0] / quad_n[0], quad[1] / quad_n[1],
          quad[2] / quad_n[2], quad[3] / quad_n[3], lo,                  hi};
}

}  // namespace

void EncoderConfig::validate() const {
  if (stride < 2) fail(ErrorCode::InvalidArgument, "encoder stride must be >= 2");
  if (key_dim < 4) fail(ErrorCode::InvalidArgument, "encoder key_dim must be >= 4");
}

Grid3 encode_keys(const Image& img, const EncoderConfig& cfg) {
  cfg.validate();
  check_divisible(img.width, img.height, cfg.stride);
  const std::size_t H = img.height / cfg.stride, W = img.width / cfg.stride, D = cfg.key_dim;
  Grid3 keys(H, W, D);
  parallel_for(
      H * W,
      [&](std::size_t c0, std::size_t c1) {
        for (std::size_t c = c0; c < c1; ++c) {
          const std::size_t gy = c / W, gx = c % W;
          const auto feat = describe_cell(img, gx * cfg.stride, gy * cfg.stride, cfg.stride);
          auto out = keys.cell(gy, gx);
          const std::size_t n = std::min(D, feat.size());
          std::copy_n(feat.begin(), n, out.begin());
          double norm2 = 0.0;
          for (double v : out) norm2 += v * v;
          if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& v : out) v *= inv;
          }
        }
      },
      16);
  return keys;
}

std::vector<Grid3> encode_values(std::span<const ProbMap> object_probs, const EncoderConfig& cfg) {
  cfg.validate();
  std::vector<Grid3> out;
  out.reserve(object_probs.size());
  const std::size_t s = cfg.stride;
  for (const auto& pm : object_probs) {
    check_divisible(pm.width, pm.height, s);
    for (double p : pm.probs)
      if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "probability outside [0, 1]");
    const std::size_t H = pm.height / s, W = pm.width / s;
    Grid3 g(H, W, 1);
    for (std::size_t gy = 0; gy < H; ++gy)
      for (std::size_t gx = 0; gx < W; ++gx) {
        double sum = 0.0;
        for (std::size_t y = gy * s; y < (gy + 1) * s; ++y)
          for (std::size_t x = gx * s; x < (gx + 1) * s; ++x) sum += pm.at(x, y);
        g(gy, gx, 0) = sum / static_cast<double>(s * s);
      }
    out.push_back(std::move(g));
  }
  return out;
}

UpsampleMode parse_upsample_mode(std::string_view name) {
  if (name == "nearest") return UpsampleMode::Nearest;
  if (name == "bilinear") return UpsampleMode::Bilinear;
  fail(ErrorCode::InvalidArgument, "unknown upsample mode '" + std::string(name) + "'");
}

std::string_view to_string(UpsampleMode mode) {
  return mode == UpsampleMode::Nearest ? "nearest" : "bilinear";
}

ProbMap upsample_probs(const Grid3& grid, std::size_t stride, UpsampleMode mode, std::size_t channel) {
  if (grid.cells() == 0 || stride == 0) fail(ErrorCode::InvalidArgument, "cannot upsample an empty grid");
  if (channel >= grid.depth()) fail(ErrorCode::InvalidArgument, "upsample channel out of range");
  const std::size_t H = grid.height(), W = grid.width();
  ProbMap out(W * stride, H * stride);

  if (mode == UpsampleMode::Nearest) {
    for (std::size_t y = 0; y < out.height; ++y)
      for (std::size_t x = 0; x < out.width; ++x) out.at(x, y) = grid(y / stride, x / stride, channel);
    return out;
  }
  if (mode != UpsampleMode::Bilinear) fail(ErrorCode::InvalidArgument, "unknown upsample mode");

  struct Tap {
    std::size_t lo, hi;
    double frac;
  };
  auto taps = [stride](std::size_t n_pixels, std::size_t n_cells) {
    std::vector<Tap> t(n_pixels);
    for (std::size_t i = 0; i < n_pixels; ++i) {
      double g = (static_cast<double>(i) + 0.5) / static_cast<double>(stride) - 0.5;
      g = std::clamp(g, 0.0, static_cast<double>(n_cells - 1));
      const auto lo = static_cast<std::size_t>(std::floor(g));
      t[i] = {lo, std::min(lo + 1, n_cells - 1), g - static_cast<double>(lo)};
    }
    return t;
  };
  const auto tx = taps(out.width, W);
  const auto ty = taps(out.height, H);
  for (std::size_t y = 0; y < out.height; ++y)
    for (std::size_t x = 0; x < out.width; ++x) {
      const auto& a = ty[y];
      const auto& b = tx[x];
      const double top = grid(a.lo, b.lo, channel) * (1 - b.frac) + grid(a.lo, b.hi, channel) * b.frac;
      const double bot = grid(a.hi, b.lo, channel) * (1 - b.frac) + grid(a.hi, b.hi, channel) * b.frac;
      out.at(x, y) = top * (1 - a.frac) + bot * a.frac;
    }
  return out;
}

}  // namespace kmn
