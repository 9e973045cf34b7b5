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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace kmn {

/// 8-bit RGB, row-major, interleaved.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;

  Image() = default;
  Image(std::size_t w, std::size_t h) : width(w), height(h), rgb(w * h * 3, 0) {}

  std::uint8_t& at(std::size_t x, std::size_t y, std::size_t ch) { return rgb[(y * width + x) * 3 + ch]; }
  std::uint8_t at(std::size_t x, std::size_t y, std::size_t ch) const { return rgb[(y * width + x) * 3 + ch]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Per-pixel object labels, 0 = background.
struct LabelMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> labels;

  LabelMask() = default;
  LabelMask(std::size_t w, std::size_t h) : width(w), height(h), labels(w * h, 0) {}

  std::uint8_t& at(std::size_t x, std::size_t y) { return labels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return labels[y * width + x]; }

  std::uint8_t max_label() const;

  friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

/// Per-pixel probability for one object.
struct ProbMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> probs;

  ProbMap() = default;
  ProbMap(std::size_t w, std::size_t h, double fill = 0.0) : width(w), height(h), probs(w * h, fill) {}

  double& at(std::size_t x, std::size_t y) { return probs[y * width + x]; }
  double at(std::size_t x, std::size_t y) const { return probs[y * width + x]; }
};

/// Binary (P6) PPM with maxval 255.
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& img);

/// Binary (P5) PGM with maxval 255, used for label masks.
LabelMask read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const LabelMask& mask);

}  // namespace kmn
