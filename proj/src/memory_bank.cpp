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

#include "kmn/memory_bank.hpp"

#include <algorithm>
#include <string>

#include "kmn/error.hpp"

namespace kmn {

std::vector<int> select_memory_frames(int t, int stride) {
  if (t <= 0) fail(ErrorCode::InvalidArgument, "memory selection needs t >= 1, got " + std::to_string(t));
  if (stride < 1) fail(ErrorCode::InvalidArgument, "memory stride must be >= 1");
  std::vector<int> out{0};
  for (int k = stride; k < t - 1; k += stride) out.push_back(k);
  if (t - 1 > 0) out.push_back(t - 1);
  return out;
}

MemoryBank::MemoryBank(std::size_t object_count, int stride) : objects_(object_count), stride_(stride) {
  if (object_count == 0) fail(ErrorCode::InvalidArgument, "memory bank needs at least one object");
  if (stride < 1) fail(ErrorCode::InvalidArgument, "memory stride must be >= 1");
}

bool MemoryBank::keep(int frame_index, int latest) const {
  return frame_index == 0 || frame_index % stride_ == 0 || frame_index == latest;
}

void MemoryBank::append_frame(int frame_index, Grid3 keys, std::vector<Grid3> values) {
  if (entries_.empty()) {
    if (frame_index != 0) fail(ErrorCode::InvalidArgument, "first memory frame must be frame 0");
  } else if (frame_index <= entries_.back().frame_index) {
    fail(ErrorCode::InvalidArgument, "memory frame index " + std::to_string(frame_index) +
                                         " is not after " + std::to_string(entries_.back().frame_index));
  }
  if (values.size() != objects_)
    fail(ErrorCode::ShapeMismatch, "expected " + std::to_string(objects_) + " value grids, got " +
                                       std::to_string(values.size()));
  for (const auto& v : values)
    if (v.height() != keys.height() || v.width() != keys.width())
      fail(ErrorCode::ShapeMismatch, "value grid " + v.shape_string() + " does not match keys " +
                                         keys.shape_string());
  if (!entries_.empty()) {
    const auto& ref = entries_.front();
    if (keys.height() != ref.keys.height() || keys.width() != ref.keys.width() ||
        keys.depth() != ref.keys.depth())
      fail(ErrorCode::ShapeMismatch, "keys " + keys.shape_string() + " do not match bank keys " +
                                         ref.keys.shape_string());
    for (std::size_t m = 0; m < objects_; ++m)
      if (values[m].depth() != ref.values[m].depth())
        fail(ErrorCode::ShapeMismatch, "value depth mismatch for object " + std::to_string(m + 1));
  }
  entries_.push_back({frame_index, std::move(keys), std::move(values)});
  std::erase_if(entries_, [&](const MemoryEntry& e) { return !keep(e.frame_index, frame_index); });
}

bool MemoryBank::contains(int frame_index) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const MemoryEntry& e) { return e.frame_index == frame_index; });
}

int MemoryBank::last_frame() const {
  if (entries_.empty()) fail(ErrorCode::InvalidArgument, "memory bank is empty");
  return entries_.back().frame_index;
}

std::vector<int> MemoryBank::frame_indices() const {
  std::vector<int> out;
  for (const auto& e : entries_) out.push_back(e.frame_index);
  return out;
}

GatheredMemory MemoryBank::gather(std::span<const int> indices) const {
  if (indices.empty()) fail(ErrorCode::InvalidArgument, "gather needs at least one frame index");
  std::vector<int> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  std::vector<const MemoryEntry*> picked;
  for (int idx : sorted) {
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const MemoryEntry& e) { return e.frame_index == idx; });
    if (it == entries_.end())
      fail(ErrorCode::InvalidArgument, "frame " + std::to_string(idx) + " is not in the memory bank");
    picked.push_back(&*it);
  }

  const auto& k0 = picked.front()->keys;
  const std::size_t T = picked.size(), H = k0.height(), W = k0.width();
  std::vector<double> keys;
  keys.reserve(T * H * W * k0.depth());
  for (auto* e : picked) keys.insert(keys.end(), e->keys.data().begin(), e->keys.data().end());

  GatheredMemory out{Grid4(T, H, W, k0.depth(), std::move(keys)), {}, sorted};
  for (std::size_t m = 0; m < objects_; ++m) {
    const std::size_t V = picked.front()->values[m].depth();
    std::vector<double> vals;
    vals.reserve(T * H * W * V);
    for (auto* e : picked) vals.insert(vals.end(), e->values[m].data().begin(), e->values[m].data().end());
    out.values.emplace_back(T, H, W, V, std::move(vals));
  }
  return out;
}

}  // namespace kmn
