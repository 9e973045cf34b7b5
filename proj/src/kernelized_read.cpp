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

#include "kmn/kernelized_read.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kmn/error.hpp"
#include "kmn/parallel.hpp"

namespace kmn {
namespace {

void check_values(const CorrelationMap& c, const Grid4& v) {
  if (v.frames() != c.frames() || v.height() != c.height() || v.width() != c.width())
    fail(ErrorCode::ShapeMismatch, "memory values " + v.shape_string() + " do not match correlation map (" +
                                       std::to_string(c.frames()) + ", " + std::to_string(c.height()) + ", " +
                                       std::to_string(c.width()) + ")");
  if (c.memory_cells() == 0) fail(ErrorCode::InvalidArgument, "empty correlation map");
}

double squared_distance(QueryPos a, QueryPos b) {
  const double dy = a.y - b.y;
  const double dx = a.x - b.x;
  return dy * dy + dx * dx;
}

// Normalises log-weights in place into a probability vector.
void normalize_log_weights(std::vector<double>& logw) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : logw) m = std::max(m, v);
  double total = 0.0;
  for (double& v : logw) {
    v = std::exp(v - m);
    total += v;
  }
  for (double& v : logw) v /= total;
}

void log_weights_stm(const CorrelationMap& c, std::size_t q, std::vector<double>& out) {
  out.resize(c.memory_cells());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = c.at(p, q);
}

// log(exp(c/sqrt(d)) * g) evaluated without forming g, so tiny sigmas
// do not underflow the denominator.
void log_weights_kmn(const CorrelationMap& c, const ArgmaxField& best, const ReadConfig& cfg, std::size_t q,
                     std::vector<double>& out) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.key_dim));
  const QueryPos qpos = c.query_pos(q);
  out.resize(c.memory_cells());
  if (cfg.sigma.is_uniform()) {
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = c.at(p, q) * scale;
    return;
  }
  const double inv_two_var = 1.0 / (2.0 * cfg.sigma.value() * cfg.sigma.value());
  for (std::size_t p = 0; p < out.size(); ++p)
    out[p] = c.at(p, q) * scale - squared_distance(qpos, best[p]) * inv_two_var;
}

template <typename LogWeights>
Grid3 weighted_read(const CorrelationMap& c, const Grid4& v, LogWeights&& log_weights) {
  const std::size_t Q = c.query_cells();
  const std::size_t V = v.depth();
  Grid3 r(c.height(), c.width(), V);
  parallel_for(
      Q,
      [&](std::size_t q0, std::size_t q1) {
        std::vector<double> w;
        for (std::size_t q = q0; q < q1; ++q) {
          log_weights(q, w);
          normalize_log_weights(w);
          auto out = r.data().subspan(q * V, V);
          for (std::size_t p = 0; p < w.size(); ++p) {
            auto vp = v.cell(p);
            for (std::size_t k = 0; k < V; ++k) out[k] += w[p] * vp[k];
          }
        }
      },
      8);
  return r;
}

}  // namespace

KernelSigma::KernelSigma(double sigma) : sigma_(sigma), uniform_(false) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    fail(ErrorCode::InvalidArgument, "kernel sigma must be positive and finite, got " + std::to_string(sigma));
}

void ReadConfig::validate() const {
  if (key_dim < 1) fail(ErrorCode::InvalidArgument, "key_dim must be >= 1");
}

ArgmaxField memory_to_query_argmax(const CorrelationMap& c) {
  ArgmaxField best(c.frames(), c.height(), c.width());
  parallel_for(
      c.memory_cells(),
      [&](std::size_t p0, std::size_t p1) {
        for (std::size_t p = p0; p < p1; ++p) best[p] = argmax2d(c.slice(p), c.height(), c.width());
      },
      16);
  return best;
}

double gaussian_weight(QueryPos q, QueryPos q_hat, KernelSigma sigma) {
  if (sigma.is_uniform()) return 1.0;
  return std::exp(-squared_distance(q, q_hat) / (2.0 * sigma.value() * sigma.value()));
}

Grid3 read_stm(const CorrelationMap& c, const Grid4& memory_values) {
  check_values(c, memory_values);
  return weighted_read(c, memory_values,
                       [&](std::size_t q, std::vector<double>& w) { log_weights_stm(c, q, w); });
}

Grid3 read_kmn(const CorrelationMap& c, const Grid4& memory_values, const ReadConfig& cfg) {
  cfg.validate();
  check_values(c, memory_values);
  const ArgmaxField best = memory_to_query_argmax(c);
  return weighted_read(c, memory_values,
                       [&](std::size_t q, std::vector<double>& w) { log_weights_kmn(c, best, cfg, q, w); });
}

std::vector<double> stm_weights(const CorrelationMap& c, QueryPos q) {
  std::vector<double> w;
  log_weights_stm(c, c.query_index(q), w);
  normalize_log_weights(w);
  return w;
}

std::vector<double> kmn_weights(const CorrelationMap& c, const ArgmaxField& best, const ReadConfig& cfg,
                                QueryPos q) {
  cfg.validate();
  std::vector<double> w;
  log_weights_kmn(c, best, cfg, c.query_index(q), w);
  normalize_log_weights(w);
  return w;
}

CorrelationMap materialize_kernel(const ArgmaxField& best, KernelSigma sigma) {
  CorrelationMap g(best.frames(), best.height(), best.width());
  const std::size_t Q = g.query_cells();
  for (std::size_t p = 0; p < best.size(); ++p) {
    auto row = g.slice(p);
    for (std::size_t q = 0; q < Q; ++q) row[q] = gaussian_weight(g.query_pos(q), best[p], sigma);
  }
  return g;
}

}  // namespace kmn
