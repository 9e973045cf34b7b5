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
#include <vector>

#include "kmn/tensor.hpp"

namespace kmn {

/// Per memory cell, the best-matched query cell.
class ArgmaxField {
 public:
  ArgmaxField(std::size_t t, std::size_t h, std::size_t w) : t_(t), h_(h), w_(w), best_(t * h * w) {}

  std::size_t frames() const { return t_; }
  std::size_t height() const { return h_; }
  std::size_t width() const { return w_; }

  QueryPos operator[](std::size_t p) const { return best_[p]; }
  QueryPos& operator[](std::size_t p) { return best_[p]; }
  QueryPos at(MemoryPos p) const {
    return best_[(static_cast<std::size_t>(p.t) * h_ + p.y) * w_ + p.x];
  }
  std::size_t size() const { return best_.size(); }

 private:
  std::size_t t_, h_, w_;
  std::vector<QueryPos> best_;
};

/// Gaussian standard deviation in query-grid cells, or the uniform kernel
/// (g == 1 everywhere).
class KernelSigma {
 public:
  explicit KernelSigma(double sigma);
  static KernelSigma uniform() { return KernelSigma(); }

  bool is_uniform() const { return uniform_; }
  double value() const { return sigma_; }

 private:
  KernelSigma() : sigma_(0.0), uniform_(true) {}
  double sigma_;
  bool uniform_;
};

struct ReadConfig {
  KernelSigma sigma{7.0};
  std::size_t key_dim = 12;  // scores are scaled by 1/sqrt(key_dim)

  void validate() const;
};

ArgmaxField memory_to_query_argmax(const CorrelationMap& c);

/// exp(-|q - q_hat|^2 / (2 sigma^2)); 1 for the uniform kernel.
double gaussian_weight(QueryPos q, QueryPos q_hat, KernelSigma sigma);

/// Non-local read: r(q) = sum_p softmax_p(c(p,q)) vM(p), unscaled scores.
/// Values are (T, H, W, V) and must share (T, H, W) with c.
Grid3 read_stm(const CorrelationMap& c, const Grid4& memory_values);

/// Kernelized read: softmax_p(c(p,q)/sqrt(d)) reweighted by the Gaussian
/// centred on each memory cell's best query match.
Grid3 read_kmn(const CorrelationMap& c, const Grid4& memory_values, const ReadConfig& cfg);

// Normalised weights over all memory cells p for a single query cell; these
// are exactly the coefficients the reads apply to the memory values.
std::vector<double> stm_weights(const CorrelationMap& c, QueryPos q);
std::vector<double> kmn_weights(const CorrelationMap& c, const ArgmaxField& best, const ReadConfig& cfg,
                                QueryPos q);

/// Full (T, H, W, H, W) kernel field. Debug/test only; the reads evaluate g
/// on the fly.
CorrelationMap materialize_kernel(const ArgmaxField& best, KernelSigma sigma);

}  // namespace kmn
