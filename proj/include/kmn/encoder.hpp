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
#include <span>
#include <string_view>
#include <vector>

#include "kmn/image.hpp"
#include "kmn/tensor.hpp"

namespace kmn {

struct EncoderConfig {
  std::size_t stride = 16;  // pixels per grid cell along each axis
  std::size_t key_dim = 12;

  void validate() const;
};

/// Number of hand-crafted features before truncation / zero padding.
inline constexpr std::size_t kDescriptorFeatures = 12;

/// Per-cell descriptor, L2-normalised (all-zero stays zero). Features, in
/// cell-local intensity units of [0, 1]:
///   mean R, mean G, mean B, intensity std, mean |dI/dx|, mean |dI/dy|,
///   mean intensity of the 4 half-stride quadrants (row-major), min, max.
/// Gradients use only pixel pairs inside the cell, so each descriptor is a
/// function of that cell's pixels alone.
Grid3 encode_keys(const Image& img, const EncoderConfig& cfg);

/// Cell-mean foreground probability per object: one (H, W, 1) grid each.
std::vector<Grid3> encode_values(std::span<const ProbMap> object_probs, const EncoderConfig& cfg);

enum class UpsampleMode { Nearest, Bilinear };

UpsampleMode parse_upsample_mode(std::string_view name);
std::string_view to_string(UpsampleMode mode);

/// Expands channel `channel` of a cell grid back to pixels. Nearest is block
/// replication; bilinear interpolates between cell centres with edge clamping.
ProbMap upsample_probs(const Grid3& grid, std::size_t stride, UpsampleMode mode, std::size_t channel = 0);

}  // namespace kmn
