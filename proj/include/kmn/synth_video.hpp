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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "kmn/image.hpp"

namespace kmn {

struct AffineParams {
  double rotation_deg = 0.0;
  bool flip_horizontal = false;
  double scale = 1.0;
  double dx = 0.0;  // pixels
  double dy = 0.0;
  double brightness = 1.0;
  double contrast = 1.0;

  void validate() const;
};

struct Range {
  double lo;
  double hi;
};

/// Sampling ranges for random_affine_params. Translation is a fraction of the
/// image width/height; flip is a Bernoulli probability.
struct AffineRanges {
  Range rotation_deg{-15.0, 15.0};
  Range scale{0.9, 1.1};
  Range translate_frac{-0.1, 0.1};
  Range brightness{0.9, 1.1};
  Range contrast{0.9, 1.1};
  double flip_prob = 0.5;

  static AffineRanges identity();
  void validate() const;
};

/// Draws parameters uniformly inside the ranges; width/height convert the
/// translation fraction into pixels.
AffineParams random_affine_params(std::uint64_t seed, const AffineRanges& ranges, std::size_t width,
                                  std::size_t height);

/// Warps the pair with one transform about the image centre: bilinear for the
/// image, nearest for labels. Uncovered pixels take the source mean colour and
/// the background label.
std::pair<Image, LabelMask> affine_sample(const Image& img, const LabelMask& mask, const AffineParams& params);

struct HideSeekConfig {
  int grid_size = 24;
  double hide_prob = 0.0;

  void validate() const;
};

/// Cell (row, column) bounds on a grid_size x grid_size partition; the last
/// row/column absorbs remainder pixels.
struct CellBounds {
  std::size_t x0, x1, y0, y1;
};
CellBounds hide_seek_cell(std::size_t width, std::size_t height, int grid_size, int row, int col);

/// Row-major grid_size^2 hidden-cell indicator; depends only on
/// (seed, grid_size, hide_prob).
std::vector<bool> hidden_cells(const HideSeekConfig& cfg, std::uint64_t seed);

struct HideSeekResult {
  Image image;
  LabelMask mask;
  std::vector<bool> hidden;
  std::array<std::uint8_t, 3> fill;
};

/// Hides each grid cell independently with probability hide_prob: pixels take
/// the image mean colour and labels become background.
HideSeekResult hide_and_seek(const Image& img, const LabelMask& mask, const HideSeekConfig& cfg,
                             std::uint64_t seed);

std::array<std::uint8_t, 3> mean_color(const Image& img);

struct SequenceManifest {
  std::filesystem::path directory;  // frame/mask paths are relative to this
  std::vector<std::string> frames;
  std::vector<std::string> masks;
  int objects = 0;
  std::uint64_t seed = 0;
  std::string config_json = "{}";

  std::size_t size() const { return frames.size(); }
  std::filesystem::path frame_path(std::size_t i) const { return directory / frames.at(i); }
  std::filesystem::path mask_path(std::size_t i) const { return directory / masks.at(i); }
};

inline constexpr const char* kManifestFileName = "manifest.json";

void write_manifest(const SequenceManifest& m);
SequenceManifest read_manifest(const std::filesystem::path& path);

/// Frame 0 is the input pair untouched; frames 1..n-1 are independent affine
/// samples followed by Hide-and-Seek. Everything is written under out_dir.
SequenceManifest synth_sequence(const Image& img, const LabelMask& mask, int n_frames, const AffineRanges& ranges,
                                const HideSeekConfig& hide_seek, std::uint64_t seed,
                                const std::filesystem::path& out_dir);

}  // namespace kmn
