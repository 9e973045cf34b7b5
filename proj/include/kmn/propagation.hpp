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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kmn/encoder.hpp"
#include "kmn/image.hpp"
#include "kmn/kernelized_read.hpp"
#include "kmn/memory_bank.hpp"
#include "kmn/synth_video.hpp"

namespace kmn {

enum class ReadMode { Stm, Kmn };

ReadMode parse_read_mode(std::string_view name);
std::string_view to_string(ReadMode mode);

inline constexpr double kDefaultKeyGain = 160.0;

struct PropagationConfig {
  ReadMode mode = ReadMode::Kmn;
  ReadConfig read;
  EncoderConfig encoder;
  int memory_stride = 5;
  UpsampleMode upsample = UpsampleMode::Nearest;
  // Multiplies every correlation score before the read. Unit-norm keys give
  // scores in [-1, 1], far too flat for a softmax; the gain plays the role of
  // the magnitude a learned embedding would have.
  double key_gain = kDefaultKeyGain;
  bool fast_correlation = true;

  void validate() const;
};

/// Odds-normalised merge of independent per-object probabilities. Returns
/// M+1 maps; index 0 is background.
std::vector<ProbMap> soft_aggregate(std::span<const ProbMap> object_probs);

/// Per-pixel argmax over aggregated maps (index 0 = background). Ties go to
/// background, then to the lowest object index.
LabelMask hard_mask(std::span<const ProbMap> aggregated);

/// One-hot mask probabilities encoded as memory values, for the given frame.
std::vector<Grid3> mask_values(const LabelMask& mask, std::size_t objects, const EncoderConfig& cfg);

struct FrameState {
  std::vector<Grid3> retrieved;  // per object, pre-aggregation (H, W, 1)
  std::vector<ProbMap> probs;    // M+1 aggregated maps, background first
  LabelMask hard;
  std::vector<int> memory_frames;
};

/// Predicts the frame after the bank's latest entry.
FrameState propagate_frame(const MemoryBank& bank, const Image& frame, const PropagationConfig& cfg);

/// Read coefficients over the gathered memory cells (flattened (T, H, W))
/// for one query cell, using the same path as propagate_frame.
struct ReadWeights {
  std::vector<double> weights;
  std::vector<int> memory_frames;
  std::size_t height, width;
};
ReadWeights read_weights(const MemoryBank& bank, const Image& frame, const PropagationConfig& cfg, QueryPos q);

/// Memory values for a predicted frame, taken from its aggregated soft output.
std::vector<Grid3> predicted_values(const FrameState& state, const EncoderConfig& cfg);

struct RunReport {
  std::size_t frames = 0;
  ReadMode mode = ReadMode::Kmn;
  KernelSigma sigma{7.0};
  std::vector<double> per_frame_ms;
  std::vector<std::string> mask_paths;  // relative to the output directory
  std::vector<std::vector<int>> memory_frames;
  std::string config_json = "{}";

  std::string to_json() const;
};

inline constexpr const char* kRunReportFileName = "report.json";

/// Propagates the frame-0 ground truth through the whole sequence, writing
/// pred_XXX.pgm masks (frame 0 is the given mask) and report.json to out_dir.
/// `config_json` is echoed verbatim into the report.
RunReport run_sequence(const SequenceManifest& manifest, const PropagationConfig& cfg,
                       const std::filesystem::path& out_dir, const std::string& config_json = "{}");

}  // namespace kmn
