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
#include <vector>

#include "kmn/tensor.hpp"

namespace kmn {

/// Memory frames used to segment frame t: the first frame, the previous
/// frame, and every intermediate frame on the stride grid.
std::vector<int> select_memory_frames(int t, int stride = 5);

struct MemoryEntry {
  int frame_index;
  Grid3 keys;                 // (H, W, D)
  std::vector<Grid3> values;  // one (H, W, V) grid per object
};

struct GatheredMemory {
  Grid4 keys;
  std::vector<Grid4> values;  // per object
  std::vector<int> frame_indices;
};

/// Key/value grids of past frames for one sequence. Only frames that a later
/// select_memory_frames() call can ask for are retained: frame 0, multiples
/// of the stride, and the most recent frame.
class MemoryBank {
 public:
  explicit MemoryBank(std::size_t object_count, int stride = 5);

  void append_frame(int frame_index, Grid3 keys, std::vector<Grid3> values);

  /// Stacks the requested frames in ascending frame order.
  GatheredMemory gather(std::span<const int> indices) const;

  bool contains(int frame_index) const;
  bool empty() const { return entries_.empty(); }
  int last_frame() const;
  std::size_t object_count() const { return objects_; }
  int stride() const { return stride_; }
  const std::vector<MemoryEntry>& entries() const { return entries_; }

  std::vector<int> frame_indices() const;

 private:
  bool keep(int frame_index, int latest) const;

  std::size_t objects_;
  int stride_;
  std::vector<MemoryEntry> entries_;
};

}  // namespace kmn
