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

#include "kmn/propagation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

#include "kmn/error.hpp"

namespace kmn {
namespace {

constexpr double kProbFloor = 1e-7;

Grid3 scaled_keys(const Grid3& keys, double gain) {
  std::vector<double> d(keys.data().begin(), keys.data().end());
  for (double& v : d) v *= gain;
  return Grid3(keys.height(), keys.width(), keys.depth(), std::move(d));
}

struct PreparedRead {
  GatheredMemory memory;
  CorrelationMap corr;
};

PreparedRead prepare_read(const MemoryBank& bank, const Image& frame, const PropagationConfig& cfg) {
  cfg.validate();
  if (bank.empty()) fail(ErrorCode::InvalidArgument, "propagation needs a non-empty memory bank");
  const auto indices = select_memory_frames(bank.last_frame() + 1, bank.stride());
  auto memory = bank.gather(indices);
  const Grid3 query = scaled_keys(encode_keys(frame, cfg.encoder), cfg.key_gain);
  auto corr = cfg.fast_correlation ? correlate_fast(memory.keys, query) : correlate_naive(memory.keys, query);
  return {std::move(memory), std::move(corr)};
}

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", prefix, i, ext);
  return buf;
}

}  // namespace

ReadMode parse_read_mode(std::string_view name) {
  if (name == "stm") return ReadMode::Stm;
  if (name == "kmn") return ReadMode::Kmn;
  fail(ErrorCode::InvalidArgument, "unknown read mode '" + std::string(name) + "'");
}

std::string_view to_string(ReadMode mode) { return mode == ReadMode::Stm ? "stm" : "kmn"; }

void PropagationConfig::validate() const {
  read.validate();
  encoder.validate();
  if (read.key_dim != encoder.key_dim)
    fail(ErrorCode::InvalidArgument, "read key_dim " + std::to_string(read.key_dim) +
                                         " differs from encoder key_dim " + std::to_string(encoder.key_dim));
  if (memory_stride < 1) fail(ErrorCode::InvalidArgument, "memory stride must be >= 1");
  if (!(key_gain > 0.0) || !std::isfinite(key_gain)) fail(ErrorCode::InvalidArgument, "key gain must be positive");
}

std::vector<ProbMap> soft_aggregate(std::span<const ProbMap> object_probs) {
  if (object_probs.empty()) fail(ErrorCode::InvalidArgument, "soft aggregation needs at least one object");
  const std::size_t W = object_probs[0].width, H = object_probs[0].height, M = object_probs.size();
  for (const auto& pm : object_probs)
    if (pm.width != W || pm.height != H) fail(ErrorCode::ShapeMismatch, "object probability maps differ in size");

  std::vector<ProbMap> out(M + 1, ProbMap(W, H));
  std::vector<double> odds(M);
  for (std::size_t i = 0; i < W * H; ++i) {
    double bg = 1.0;
    double total = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const double p = std::clamp(object_probs[m].probs[i], kProbFloor, 1.0 - kProbFloor);
      bg *= 1.0 - p;
      odds[m] = p / (1.0 - p);
      total += odds[m];
    }
    if (bg >= 1.0) {
      out[0].probs[i] = 1.0;
      continue;
    }
    const double bg_odds = bg / (1.0 - bg);
    total += bg_odds;
    out[0].probs[i] = bg_odds / total;
    for (std::size_t m = 0; m < M; ++m) out[m + 1].probs[i] = odds[m] / total;
  }
  return out;
}

LabelMask hard_mask(std::span<const ProbMap> aggregated) {
  if (aggregated.empty()) fail(ErrorCode::InvalidArgument, "no probability maps");
  if (aggregated.size() > 256) fail(ErrorCode::InvalidArgument, "too many objects for 8-bit labels");
  const std::size_t W = aggregated[0].width, H = aggregated[0].height;
  LabelMask mask(W, H);
  for (std::size_t i = 0; i < W * H; ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < aggregated.size(); ++k)
      if (aggregated[k].probs[i] > aggregated[best].probs[i]) best = k;
    mask.labels[i] = static_cast<std::uint8_t>(best);
  }
  return mask;
}

std::vector<Grid3> mask_values(const LabelMask& mask, std::size_t objects, const EncoderConfig& cfg) {
  std::vector<ProbMap> onehot(objects, ProbMap(mask.width, mask.height));
  for (std::size_t i = 0; i < mask.labels.size(); ++i) {
    const std::size_t l = mask.labels[i];
    if (l > objects) fail(ErrorCode::InvalidArgument, "mask label " + std::to_string(l) + " exceeds object count");
    if (l > 0) onehot[l - 1].probs[i] = 1.0;
  }
  return encode_values(onehot, cfg);
}

FrameState propagate_frame(const MemoryBank& bank, const Image& frame, const PropagationConfig& cfg) {
  auto prep = prepare_read(bank, frame, cfg);
  FrameState st;
  st.memory_frames = prep.memory.frame_indices;
  std::vector<ProbMap> pixel_probs;
  for (const auto& values : prep.memory.values) {
    Grid3 r = cfg.mode == ReadMode::Stm ? read_stm(prep.corr, values) : read_kmn(prep.corr, values, cfg.read);
    auto pm = upsample_probs(r, cfg.encoder.stride, cfg.upsample);
    for (double& p : pm.probs) p = std::clamp(p, 0.0, 1.0);
    pixel_probs.push_back(std::move(pm));
    st.retrieved.push_back(std::move(r));
  }
  st.probs = soft_aggregate(pixel_probs);
  st.hard = hard_mask(st.probs);
  return st;
}

ReadWeights read_weights(const MemoryBank& bank, const Image& frame, const PropagationConfig& cfg, QueryPos q) {
  auto prep = prepare_read(bank, frame, cfg);
  if (q.y < 0 || q.x < 0 || static_cast<std::size_t>(q.y) >= prep.corr.height() ||
      static_cast<std::size_t>(q.x) >= prep.corr.width())
    fail(ErrorCode::InvalidArgument, "query cell out of range");
  std::vector<double> w = cfg.mode == ReadMode::Stm
                              ? stm_weights(prep.corr, q)
                              : kmn_weights(prep.corr, memory_to_query_argmax(prep.corr), cfg.read, q);
  return {std::move(w), prep.memory.frame_indices, prep.corr.height(), prep.corr.width()};
}

std::vector<Grid3> predicted_values(const FrameState& state, const EncoderConfig& cfg) {
  std::span<const ProbMap> objects(state.probs);
  return encode_values(objects.subspan(1), cfg);
}

std::string RunReport::to_json() const {
  nlohmann::json j;
  j["frames"] = frames;
  j["mode"] = to_string(mode);
  if (sigma.is_uniform())
    j["sigma"] = "uniform";
  else
    j["sigma"] = sigma.value();
  j["per_frame_ms"] = per_frame_ms;
  j["mask_paths"] = mask_paths;
  j["memory_frames"] = memory_frames;
  j["config"] = nlohmann::json::parse(config_json);
  return j.dump(2) + "\n";
}

RunReport run_sequence(const SequenceManifest& manifest, const PropagationConfig& cfg,
                       const std::filesystem::path& out_dir, const std::string& config_json) {
  cfg.validate();
  if (manifest.size() == 0) fail(ErrorCode::InvalidArgument, "empty manifest");
  if (manifest.objects < 1) fail(ErrorCode::InvalidArgument, "manifest declares no objects");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  RunReport report;
  report.frames = manifest.size();
  report.mode = cfg.mode;
  report.sigma = cfg.read.sigma;
  report.config_json = config_json;
  const auto objects = static_cast<std::size_t>(manifest.objects);

  using clock = std::chrono::steady_clock;
  MemoryBank bank(objects, cfg.memory_stride);
  for (std::size_t t = 0; t < manifest.size(); ++t) {
    const auto start = clock::now();
    const Image frame = read_ppm(manifest.frame_path(t));
    LabelMask predicted;
    if (t == 0) {
      predicted = read_pgm(manifest.mask_path(0));
      if (predicted.width != frame.width || predicted.height != frame.height)
        fail(ErrorCode::ShapeMismatch, manifest.mask_path(0).string() + " does not match its frame");
      bank.append_frame(0, encode_keys(frame, cfg.encoder), mask_values(predicted, objects, cfg.encoder));
      report.memory_frames.push_back({});
    } else {
      auto state = propagate_frame(bank, frame, cfg);
      predicted = state.hard;
      report.memory_frames.push_back(state.memory_frames);
      bank.append_frame(static_cast<int>(t), encode_keys(frame, cfg.encoder), predicted_values(state, cfg.encoder));
    }
    const std::string name = numbered("pred", t, "pgm");
    write_pgm(out_dir / name, predicted);
    report.mask_paths.push_back(name);
    report.per_frame_ms.push_back(std::chrono::duration<double, std::milli>(clock::now() - start).count());
  }

  const auto path = out_dir / kRunReportFileName;
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
  out << report.to_json();
  return report;
}

}  // namespace kmn
