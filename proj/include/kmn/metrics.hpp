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
#include <span>
#include <string>
#include <vector>

#include "kmn/image.hpp"

namespace kmn {

struct BinaryMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> on;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(std::size_t w, std::size_t h) : width(w), height(h), on(w * h, 0) {}

  std::uint8_t& at(std::size_t x, std::size_t y) { return on[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return on[y * width + x]; }
};

BinaryMask object_mask(const LabelMask& labels, std::uint8_t object);

/// Intersection over union; two empty masks score 1.
double jaccard(const BinaryMask& pred, const BinaryMask& gt);

/// Foreground pixels with a 4-neighbour outside the foreground (the image
/// border counts as outside).
BinaryMask boundary_pixels(const BinaryMask& mask);

/// ceil(0.008 * image diagonal).
int default_boundary_tolerance(std::size_t width, std::size_t height);

/// Boundary F-measure: a boundary pixel matches if the other boundary has a
/// pixel within Chebyshev distance `tolerance`.
double boundary_f(const BinaryMask& pred, const BinaryMask& gt, int tolerance);

struct ObjectScores {
  int object;
  std::vector<double> J;  // frames 1..n-1
  std::vector<double> F;
};

struct MetricsReport {
  std::vector<ObjectScores> per_object;
  double J_M = 0.0;
  double F_M = 0.0;
  double G_M = 0.0;

  std::string to_json() const;
};

/// Frame 0 is the given annotation and is skipped. Scores are averaged over
/// frames per object, then over objects.
MetricsReport evaluate_sequence(std::span<const LabelMask> pred, std::span<const LabelMask> gt, int objects,
                                int tolerance = -1);

}  // namespace kmn
