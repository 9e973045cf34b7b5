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
#include <string>
#include <vector>

namespace kmn {

/// Query-grid cell, (row, column).
struct QueryPos {
  int y = 0;
  int x = 0;
  friend bool operator==(const QueryPos&, const QueryPos&) = default;
};

/// Memory-grid cell, (frame, row, column).
struct MemoryPos {
  int t = 0;
  int y = 0;
  int x = 0;
  friend bool operator==(const MemoryPos&, const MemoryPos&) = default;
};

/// Dense (H, W, D) row-major grid of 64-bit reals. Entries are finite.
class Grid3 {
 public:
  Grid3() = default;
  Grid3(std::size_t h, std::size_t w, std::size_t d);
  Grid3(std::size_t h, std::size_t w, std::size_t d, std::vector<double> data);

  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t depth() const { return d_; }
  std::size_t cells() const { return h_ * w_; }

  double operator()(std::size_t y, std::size_t x, std::size_t c) const {
    return data_[(y * w_ + x) * d_ + c];
  }
  double& operator()(std::size_t y, std::size_t x, std::size_t c) {
    return data_[(y * w_ + x) * d_ + c];
  }

  std::span<const double> cell(std::size_t y, std::size_t x) const {
    return {data_.data() + (y * w_ + x) * d_, d_};
  }
  std::span<double> cell(std::size_t y, std::size_t x) {
    return {data_.data() + (y * w_ + x) * d_, d_};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  std::string shape_string() const;
  friend bool operator==(const Grid3&, const Grid3&) = default;

 private:
  std::size_t h_ = 0, w_ = 0, d_ = 0;
  std::vector<double> data_;
};

/// Dense (T, H, W, D) row-major grid of 64-bit reals. Entries are finite.
class Grid4 {
 public:
  Grid4() = default;
  Grid4(std::size_t t, std::size_t h, std::size_t w, std::size_t d);
  Grid4(std::size_t t, std::size_t h, std::size_t w, std::size_t d, std::vector<double> data);

  std::size_t frames() const { return t_; }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t depth() const { return d_; }
  std::size_t cells() const { return t_ * h_ * w_; }

  double operator()(std::size_t t, std::size_t y, std::size_t x, std::size_t c) const {
    return data_[((t * h_ + y) * w_ + x) * d_ + c];
  }
  double& operator()(std::size_t t, std::size_t y, std::size_t x, std::size_t c) {
    return data_[((t * h_ + y) * w_ + x) * d_ + c];
  }

  std::span<const double> cell(std::size_t t, std::size_t y, std::size_t x) const {
    return {data_.data() + ((t * h_ + y) * w_ + x) * d_, d_};
  }
  // Flat memory-cell index p = (t*H + y)*W + x.
  std::span<const double> cell(std::size_t p) const { return {data_.data() + p * d_, d_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  std::string shape_string() const;
  friend bool operator==(const Grid4&, const Grid4&) = default;

 private:
  std::size_t t_ = 0, h_ = 0, w_ = 0, d_ = 0;
  std::vector<double> data_;
};

/// Scores c(p, q) laid out as (T, H, W, H, W): one contiguous H*W query slice
/// per memory cell.
class CorrelationMap {
 public:
  CorrelationMap() = default;
  CorrelationMap(std::size_t t, std::size_t h, std::size_t w);
  CorrelationMap(std::size_t t, std::size_t h, std::size_t w, std::vector<double> data);

  std::size_t frames() const { return t_; }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }
  std::size_t memory_cells() const { return t_ * h_ * w_; }
  std::size_t query_cells() const { return h_ * w_; }

  double operator()(MemoryPos p, QueryPos q) const {
    return data_[memory_index(p) * query_cells() + query_index(q)];
  }
  double at(std::size_t p, std::size_t q) const { return data_[p * query_cells() + q]; }

  std::span<const double> slice(std::size_t p) const {
    return {data_.data() + p * query_cells(), query_cells()};
  }
  std::span<double> slice(std::size_t p) { return {data_.data() + p * query_cells(), query_cells()}; }

  std::size_t memory_index(MemoryPos p) const {
    return (static_cast<std::size_t>(p.t) * h_ + static_cast<std::size_t>(p.y)) * w_ +
           static_cast<std::size_t>(p.x);
  }
  std::size_t query_index(QueryPos q) const {
    return static_cast<std::size_t>(q.y) * w_ + static_cast<std::size_t>(q.x);
  }
  QueryPos query_pos(std::size_t q) const {
    return {static_cast<int>(q / w_), static_cast<int>(q % w_)};
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

 private:
  std::size_t t_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

/// Stable softmax of scores*scale (max-subtracted).
std::vector<double> softmax_scaled(std::span<const double> scores, double scale);

/// Position of the maximum of an h*w row-major slice. Ties resolve to the
/// smallest row-major index.
QueryPos argmax2d(std::span<const double> slice, std::size_t h, std::size_t w);

/// Reference five-loop correlation c(p,q) = <kM(p), kQ(q)>.
CorrelationMap correlate_naive(const Grid4& memory_keys, const Grid3& query_keys);

/// Blocked, multi-threaded correlation. Accumulates every dot product in the
/// same channel order as correlate_naive.
CorrelationMap correlate_fast(const Grid4& memory_keys, const Grid3& query_keys);

}  // namespace kmn
