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

#include "kmn/synth_video.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "json.hpp"

#include "kmn/error.hpp"
#include "kmn/rng.hpp"

namespace kmn {
namespace {

using nlohmann::json;

void check_pair(const Image& img, const LabelMask& mask) {
  if (img.width == 0 || img.height == 0) fail(ErrorCode::InvalidArgument, "empty image");
  if (img.rgb.size() != img.width * img.height * 3) fail(ErrorCode::InvalidArgument, "malformed image buffer");
  if (mask.width != img.width || mask.height != img.height || mask.labels.size() != img.width * img.height)
    fail(ErrorCode::ShapeMismatch, "mask " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                                       " does not match image " + std::to_string(img.width) + "x" +
                                       std::to_string(img.height));
}

void check_range(const Range& r, const char* name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi)
    fail(ErrorCode::InvalidArgument, std::string("inverted or non-finite range for ") + name);
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", prefix, i, ext);
  return buf;
}

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }

}  // namespace

void AffineParams::validate() const {
  if (!(scale > 0.0) || !std::isfinite(scale)) fail(ErrorCode::InvalidArgument, "affine scale must be positive");
  if (!(brightness > 0.0) || !(contrast > 0.0))
    fail(ErrorCode::InvalidArgument, "colour jitter factors must be positive");
  if (!std::isfinite(rotation_deg) || !std::isfinite(dx) || !std::isfinite(dy))
    fail(ErrorCode::InvalidArgument, "affine parameters must be finite");
}

AffineRanges AffineRanges::identity() {
  return {{0.0, 0.0}, {1.0, 1.0}, {0.0, 0.0}, {1.0, 1.0}, {1.0, 1.0}, 0.0};
}

void AffineRanges::validate() const {
  check_range(rotation_deg, "rotation");
  check_range(scale, "scale");
  check_range(translate_frac, "translation");
  check_range(brightness, "brightness");
  check_range(contrast, "contrast");
  if (scale.lo <= 0.0) fail(ErrorCode::InvalidArgument, "scale range must be positive");
  if (brightness.lo <= 0.0 || contrast.lo <= 0.0)
    fail(ErrorCode::InvalidArgument, "jitter ranges must be positive");
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) fail(ErrorCode::InvalidArgument, "flip probability outside [0, 1]");
}

AffineParams random_affine_params(std::uint64_t seed, const AffineRanges& ranges, std::size_t width,
                                  std::size_t height) {
  ranges.validate();
  Rng rng(seed);
  AffineParams p;
  p.rotation_deg = rng.uniform(ranges.rotation_deg.lo, ranges.rotation_deg.hi);
  p.scale = rng.uniform(ranges.scale.lo, ranges.scale.hi);
  p.dx = rng.uniform(ranges.translate_frac.lo, ranges.translate_frac.hi) * static_cast<double>(width);
  p.dy = rng.uniform(ranges.translate_frac.lo, ranges.translate_frac.hi) * static_cast<double>(height);
  p.brightness = rng.uniform(ranges.brightness.lo, ranges.brightness.hi);
  p.contrast = rng.uniform(ranges.contrast.lo, ranges.contrast.hi);
  // Always consume the draw so the remaining stream does not depend on flip_prob.
  const double u = rng.uniform();
  p.flip_horizontal = u < ranges.flip_prob;
  return p;
}

std::array<std::uint8_t, 3> mean_color(const Image& img) {
  std::array<double, 3> sum{};
  for (std::size_t i = 0; i < img.width * img.height; ++i)
    for (int c = 0; c < 3; ++c) sum[c] += img.rgb[i * 3 + c];
  const double n = static_cast<double>(img.width * img.height);
  return {to_byte(sum[0] / n), to_byte(sum[1] / n), to_byte(sum[2] / n)};
}

std::pair<Image, LabelMask> affine_sample(const Image& img, const LabelMask& mask, const AffineParams& params) {
  check_pair(img, mask);
  params.validate();
  const std::size_t W = img.width, H = img.height;
  const double cx = static_cast<double>(W) / 2.0, cy = static_cast<double>(H) / 2.0;
  const double theta = params.rotation_deg * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);

  std::array<double, 3> channel_mean{};
  for (std::size_t i = 0; i < W * H; ++i)
    for (int c = 0; c < 3; ++c) channel_mean[c] += img.rgb[i * 3 + c];
  for (auto& m : channel_mean) m /= static_cast<double>(W * H);
  const auto fill = mean_color(img);

  Image out(W, H);
  LabelMask out_mask(W, H);
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < W; ++x) {
      // Inverse map: undo translation, rotation, scale, then flip.
      const double ux = static_cast<double>(x) + 0.5 - cx - params.dx;
      const double uy = static_cast<double>(y) + 0.5 - cy - params.dy;
      double sx = (cs * ux + sn * uy) / params.scale;
      const double sy = (-sn * ux + cs * uy) / params.scale + cy - 0.5;
      if (params.flip_horizontal) sx = -sx;
      sx += cx - 0.5;

      std::array<double, 3> px{};
      const bool inside = sx >= -0.5 && sx < static_cast<double>(W) - 0.5 && sy >= -0.5 &&
                          sy < static_cast<double>(H) - 0.5;
      if (inside) {
        const double gx = std::clamp(sx, 0.0, static_cast<double>(W - 1));
        const double gy = std::clamp(sy, 0.0, static_cast<double>(H - 1));
        const auto x0 = static_cast<std::size_t>(std::floor(gx));
        const auto y0 = static_cast<std::size_t>(std::floor(gy));
        const std::size_t x1 = std::min(x0 + 1, W - 1), y1 = std::min(y0 + 1, H - 1);
        const double fx = gx - static_cast<double>(x0), fy = gy - static_cast<double>(y0);
        for (int c = 0; c < 3; ++c) {
          const double top = img.at(x0, y0, c) * (1 - fx) + img.at(x1, y0, c) * fx;
          const double bot = img.at(x0, y1, c) * (1 - fx) + img.at(x1, y1, c) * fx;
          px[c] = top * (1 - fy) + bot * fy;
        }
        const auto ix = static_cast<std::size_t>(std::clamp(std::floor(sx + 0.5), 0.0, static_cast<double>(W - 1)));
        const auto iy = static_cast<std::size_t>(std::clamp(std::floor(sy + 0.5), 0.0, static_cast<double>(H - 1)));
        out_mask.at(x, y) = mask.at(ix, iy);
      } else {
        for (int c = 0; c < 3; ++c) px[c] = fill[c];
      }
      for (int c = 0; c < 3; ++c) {
        const double v = ((px[c] - channel_mean[c]) * params.contrast + channel_mean[c]) * params.brightness;
        // Skip the jitter arithmetic when it is the identity so exact pixels survive.
        out.at(x, y, c) =
            (params.contrast == 1.0 && params.brightness == 1.0) ? to_byte(px[c]) : to_byte(v);
      }
    }
  return {std::move(out), std::move(out_mask)};
}

void HideSeekConfig::validate() const {
  if (grid_size < 1) fail(ErrorCode::InvalidArgument, "hide-and-seek grid size must be >= 1");
  if (!(hide_prob >= 0.0 && hide_prob <= 1.0))
    fail(ErrorCode::InvalidArgument, "hide probability must lie in [0, 1], got " + std::to_string(hide_prob));
}

CellBounds hide_seek_cell(std::size_t width, std::size_t height, int grid_size, int row, int col) {
  const std::size_t S = static_cast<std::size_t>(grid_size);
  const std::size_t cw = width / S, ch = height / S;
  const std::size_t r = static_cast<std::size_t>(row), c = static_cast<std::size_t>(col);
  return {c * cw, c + 1 == S ? width : (c + 1) * cw, r * ch, r + 1 == S ? height : (r + 1) * ch};
}

std::vector<bool> hidden_cells(const HideSeekConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  std::vector<bool> hidden(static_cast<std::size_t>(cfg.grid_size) * cfg.grid_size);
  for (std::size_t i = 0; i < hidden.size(); ++i) hidden[i] = rng.bernoulli(cfg.hide_prob);
  return hidden;
}

HideSeekResult hide_and_seek(const Image& img, const LabelMask& mask, const HideSeekConfig& cfg,
                             std::uint64_t seed) {
  check_pair(img, mask);
  cfg.validate();
  if (img.width < static_cast<std::size_t>(cfg.grid_size) || img.height < static_cast<std::size_t>(cfg.grid_size))
    fail(ErrorCode::InvalidArgument, "image smaller than the hide-and-seek grid");
  HideSeekResult res{img, mask, hidden_cells(cfg, seed), mean_color(img)};
  for (int r = 0; r < cfg.grid_size; ++r)
    for (int c = 0; c < cfg.grid_size; ++c) {
      if (!res.hidden[static_cast<std::size_t>(r) * cfg.grid_size + c]) continue;
      const auto b = hide_seek_cell(img.width, img.height, cfg.grid_size, r, c);
      for (std::size_t y = b.y0; y < b.y1; ++y)
        for (std::size_t x = b.x0; x < b.x1; ++x) {
          for (int ch = 0; ch < 3; ++ch) res.image.at(x, y, ch) = res.fill[ch];
          res.mask.at(x, y) = 0;
        }
    }
  return res;
}

void write_manifest(const SequenceManifest& m) {
  json j;
  j["frames"] = m.frames;
  j["masks"] = m.masks;
  j["objects"] = m.objects;
  j["seed"] = m.seed;
  j["config"] = json::parse(m.config_json);
  const auto path = m.directory / kManifestFileName;
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "failed writing " + path.string());
}

SequenceManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  SequenceManifest m;
  m.directory = path.parent_path();
  try {
    m.frames = j.at("frames").get<std::vector<std::string>>();
    m.masks = j.at("masks").get<std::vector<std::string>>();
    m.objects = j.at("objects").get<int>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.config_json = j.value("config", json::object()).dump();
  } catch (const json::exception& e) {
    fail(ErrorCode::Format, path.string() + ": " + e.what());
  }
  if (m.frames.size() != m.masks.size())
    fail(ErrorCode::Format, path.string() + ": frames and masks differ in length");
  if (m.frames.empty()) fail(ErrorCode::Format, path.string() + ": empty sequence");
  return m;
}

SequenceManifest synth_sequence(const Image& img, const LabelMask& mask, int n_frames, const AffineRanges& ranges,
                                const HideSeekConfig& hide_seek, std::uint64_t seed,
                                const std::filesystem::path& out_dir) {
  check_pair(img, mask);
  ranges.validate();
  hide_seek.validate();
  if (n_frames < 2) fail(ErrorCode::InvalidArgument, "a synthetic sequence needs at least 2 frames");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  SequenceManifest m;
  m.directory = out_dir;
  m.objects = mask.max_label();
  m.seed = seed;
  json cfg;
  cfg["frames"] = n_frames;
  cfg["rotation_deg"] = range_json(ranges.rotation_deg);
  cfg["scale"] = range_json(ranges.scale);
  cfg["translate_frac"] = range_json(ranges.translate_frac);
  cfg["brightness"] = range_json(ranges.brightness);
  cfg["contrast"] = range_json(ranges.contrast);
  cfg["flip_prob"] = ranges.flip_prob;
  cfg["hide_grid"] = hide_seek.grid_size;
  cfg["hide_prob"] = hide_seek.hide_prob;
  m.config_json = cfg.dump();

  for (int t = 0; t < n_frames; ++t) {
    Image frame = img;
    LabelMask labels = mask;
    if (t > 0) {
      const auto params = random_affine_params(mix_seed(seed, 2 * static_cast<std::uint64_t>(t)), ranges,
                                               img.width, img.height);
      auto warped = affine_sample(img, mask, params);
      auto hidden = hide_and_seek(warped.first, warped.second, hide_seek,
                                  mix_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1));
      frame = std::move(hidden.image);
      labels = std::move(hidden.mask);
    }
    m.frames.push_back(numbered("frame", static_cast<std::size_t>(t), "ppm"));
    m.masks.push_back(numbered("mask", static_cast<std::size_t>(t), "pgm"));
    write_ppm(out_dir / m.frames.back(), frame);
    write_pgm(out_dir / m.masks.back(), labels);
  }
  write_manifest(m);
  return m;
}

}  // namespace kmn
