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

#include "kmn/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "kmn/error.hpp"

namespace kmn {
namespace {

void check_same(const BinaryMask& a, const BinaryMask& b) {
  if (a.width != b.width || a.height != b.height)
    fail(ErrorCode::ShapeMismatch, "mask " + std::to_string(a.width) + "x" + std::to_string(a.height) +
                                       " vs " + std::to_string(b.width) + "x" + std::to_string(b.height));
}

// Square (Chebyshev) dilation as two separable running-max passes.
BinaryMask dilate(const BinaryMask& m, int radius) {
  if (radius <= 0) return m;
  const auto r = static_cast<std::ptrdiff_t>(radius);
  const auto W = static_cast<std::ptrdiff_t>(m.width), H = static_cast<std::ptrdiff_t>(m.height);
  BinaryMask rows(m.width, m.height), out(m.width, m.height);
  for (std::ptrdiff_t y = 0; y < H; ++y) {
    std::ptrdiff_t last = -(r + 1) - 1;  // most recent set pixel at or left of the window end
    std::vector<std::ptrdiff_t> next(static_cast<std::size_t>(W) + 1, W + r + 1);
    for (std::ptrdiff_t x = W - 1; x >= 0; --x)
      next[x] = m.at(x, y) ? x : next[x + 1];
    for (std::ptrdiff_t x = 0; x < W; ++x) {
      if (m.at(x, y)) last = x;
      const bool hit = (x - last <= r) || (next[x] - x <= r);
      rows.at(x, y) = hit ? 1 : 0;
    }
  }
  for (std::ptrdiff_t x = 0; x < W; ++x) {
    std::ptrdiff_t last = -(r + 1) - 1;
    std::vector<std::ptrdiff_t> next(static_cast<std::size_t>(H) + 1, H + r + 1);
    for (std::ptrdiff_t y = H - 1; y >= 0; --y)
      next[y] = rows.at(x, y) ? y : next[y + 1];
    for (std::ptrdiff_t y = 0; y < H; ++y) {
      if (rows.at(x, y)) last = y;
      out.at(x, y) = ((y - last <= r) || (next[y] - y <= r)) ? 1 : 0;
    }
  }
  return out;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

BinaryMask object_mask(const LabelMask& labels, std::uint8_t object) {
  BinaryMask m(labels.width, labels.height);
  for (std::size_t i = 0; i < labels.labels.size(); ++i) m.on[i] = labels.labels[i] == object ? 1 : 0;
  return m;
}

double jaccard(const BinaryMask& pred, const BinaryMask& gt) {
  check_same(pred, gt);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.on.size(); ++i) {
    inter += (pred.on[i] && gt.on[i]) ? 1 : 0;
    uni += (pred.on[i] || gt.on[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask boundary_pixels(const BinaryMask& mask) {
  BinaryMask b(mask.width, mask.height);
  const std::size_t W = mask.width, H = mask.height;
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x) {
      if (!mask.at(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x + 1 == W || y + 1 == H || !mask.at(x - 1, y) ||
                        !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1);
      b.at(x, y) = edge ? 1 : 0;
    }
  return b;
}

int default_boundary_tolerance(std::size_t width, std::size_t height) {
  const double diag = std::hypot(static_cast<double>(width), static_cast<double>(height));
  return static_cast<int>(std::ceil(0.008 * diag));
}

double boundary_f(const BinaryMask& pred, const BinaryMask& gt, int tolerance) {
  check_same(pred, gt);
  if (tolerance < 0) fail(ErrorCode::InvalidArgument, "boundary tolerance must be >= 0");
  const BinaryMask pb = boundary_pixels(pred), gb = boundary_pixels(gt);
  const auto npred = std::count(pb.on.begin(), pb.on.end(), 1);
  const auto ngt = std::count(gb.on.begin(), gb.on.end(), 1);
  if (npred == 0 && ngt == 0) return 1.0;
  if (npred == 0 || ngt == 0) return 0.0;

  const BinaryMask gd = dilate(gb, tolerance), pd = dilate(pb, tolerance);
  std::size_t pred_hit = 0, gt_hit = 0;
  for (std::size_t i = 0; i < pb.on.size(); ++i) {
    pred_hit += (pb.on[i] && gd.on[i]) ? 1 : 0;
    gt_hit += (gb.on[i] && pd.on[i]) ? 1 : 0;
  }
  const double precision = static_cast<double>(pred_hit) / static_cast<double>(npred);
  const double recall = static_cast<double>(gt_hit) / static_cast<double>(ngt);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["per_object"] = nlohmann::json::array();
  for (const auto& o : per_object) j["per_object"].push_back({{"object", o.object}, {"J", o.J}, {"F", o.F}});
  j["J_M"] = J_M;
  j["F_M"] = F_M;
  j["G_M"] = G_M;
  return j.dump(2) + "\n";
}

MetricsReport evaluate_sequence(std::span<const LabelMask> pred, std::span<const LabelMask> gt, int objects,
                                int tolerance) {
  if (pred.size() != gt.size())
    fail(ErrorCode::InvalidArgument, "prediction count " + std::to_string(pred.size()) +
                                         " differs from ground-truth count " + std::to_string(gt.size()));
  if (gt.size() < 2) fail(ErrorCode::InvalidArgument, "evaluation needs at least two frames");
  if (objects < 1 || objects > 255) fail(ErrorCode::InvalidArgument, "object count must be in [1, 255]");

  MetricsReport rep;
  std::vector<double> j_means, f_means;
  for (int m = 1; m <= objects; ++m) {
    ObjectScores s{m, {}, {}};
    for (std::size_t t = 1; t < gt.size(); ++t) {
      const auto pm = object_mask(pred[t], static_cast<std::uint8_t>(m));
      const auto gm = object_mask(gt[t], static_cast<std::uint8_t>(m));
      const int tol = tolerance >= 0 ? tolerance : default_boundary_tolerance(gt[t].width, gt[t].height);
      s.J.push_back(jaccard(pm, gm));
      s.F.push_back(boundary_f(pm, gm, tol));
    }
    j_means.push_back(mean(s.J));
    f_means.push_back(mean(s.F));
    rep.per_object.push_back(std::move(s));
  }
  rep.J_M = mean(j_means);
  rep.F_M = mean(f_means);
  rep.G_M = (rep.J_M + rep.F_M) / 2.0;
  return rep;
}

}  // namespace kmn
