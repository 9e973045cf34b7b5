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

// kmn: synthetic sequence generation, mask propagation, evaluation and
// benchmarking from the command line. Talks to the library only through the
// C API in kmn/kmn.h.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kmn/kmn.h"

namespace {

using nlohmann::json;

struct ReportDeleter {
  void operator()(kmn_report* r) const { kmn_report_free(r); }
};
struct ManifestDeleter {
  void operator()(kmn_manifest* m) const { kmn_manifest_free(m); }
};
using ReportPtr = std::unique_ptr<kmn_report, ReportDeleter>;
using ManifestPtr = std::unique_ptr<kmn_manifest, ManifestDeleter>;

class CommandError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(kmn_status s, const std::string& what) {
  if (s != KMN_OK) throw CommandError(what + ": " + kmn_status_string(s) + ": " + kmn_last_error());
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw CommandError("cannot open config " + path);
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw CommandError("config " + path + " must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw CommandError("config " + path + ": " + e.what());
  }
}

// Applies config[key] when the flag was not given on the command line.
template <typename T>
void from_config(const json& cfg, const char* key, const CLI::Option* flag, T& value) {
  if (flag->count() > 0 || !cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw CommandError(std::string("config key '") + key + "': " + e.what());
  }
}

void pair_from_config(const json& cfg, const char* key, double out[2]) {
  if (!cfg.contains(key)) return;
  try {
    auto v = cfg.at(key).get<std::vector<double>>();
    if (v.size() != 2) throw CommandError(std::string("config key '") + key + "' needs [lo, hi]");
    out[0] = v[0];
    out[1] = v[1];
  } catch (const json::exception& e) {
    throw CommandError(std::string("config key '") + key + "': " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw CommandError("cannot write " + path);
}

struct SynthArgs {
  std::string image, mask, out, config;
  int frames = 3;
  std::uint64_t seed = 0;
  double hide_prob = 0.0;
  int grid = 24;
  CLI::Option* frames_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* hide_opt = nullptr;
  CLI::Option* grid_opt = nullptr;
};

int cmd_synth(const SynthArgs& a) {
  const json cfg = load_config(a.config);
  SynthArgs v = a;
  from_config(cfg, "frames", a.frames_opt, v.frames);
  from_config(cfg, "seed", a.seed_opt, v.seed);
  from_config(cfg, "hide_prob", a.hide_opt, v.hide_prob);
  from_config(cfg, "grid", a.grid_opt, v.grid);

  kmn_synth_params p;
  kmn_synth_params_init(&p);
  p.image_path = v.image.c_str();
  p.mask_path = v.mask.c_str();
  p.out_dir = v.out.c_str();
  p.frames = v.frames;
  p.seed = v.seed;
  p.hide_prob = v.hide_prob;
  p.hide_grid = v.grid;
  pair_from_config(cfg, "rotation_deg", p.rotation_deg);
  pair_from_config(cfg, "scale", p.scale);
  pair_from_config(cfg, "translate_frac", p.translate_frac);
  pair_from_config(cfg, "brightness", p.brightness);
  pair_from_config(cfg, "contrast", p.contrast);
  if (cfg.contains("flip_prob")) p.flip_prob = cfg.at("flip_prob").get<double>();

  kmn_manifest* raw = nullptr;
  check(kmn_synth(&p, &raw), "synth");
  ManifestPtr m(raw);
  std::cout << kmn_manifest_path(m.get()) << '\n';
  return 0;
}

struct RunArgs {
  std::string manifest, out, config, mode = "kmn", sigma = "7", upsample = "nearest";
  int stride = 5;
  std::size_t encoder_stride = 16, key_dim = 12;
  double key_gain = 0.0;
  CLI::Option *mode_opt, *sigma_opt, *stride_opt, *enc_opt, *dim_opt, *up_opt, *gain_opt;
};

int cmd_run(const RunArgs& a) {
  const json cfg = load_config(a.config);
  RunArgs v = a;
  from_config(cfg, "mode", a.mode_opt, v.mode);
  if (a.sigma_opt->count() == 0 && cfg.contains("sigma")) {
    const auto& s = cfg.at("sigma");
    v.sigma = s.is_string() ? s.get<std::string>() : s.dump();
  }
  from_config(cfg, "stride", a.stride_opt, v.stride);
  from_config(cfg, "encoder_stride", a.enc_opt, v.encoder_stride);
  from_config(cfg, "key_dim", a.dim_opt, v.key_dim);
  from_config(cfg, "upsample", a.up_opt, v.upsample);
  from_config(cfg, "key_gain", a.gain_opt, v.key_gain);

  kmn_run_params p;
  kmn_run_params_init(&p);
  if (v.mode == "stm")
    p.mode = KMN_READ_STM;
  else if (v.mode == "kmn")
    p.mode = KMN_READ_KMN;
  else
    throw CommandError("--mode must be stm or kmn");
  if (v.sigma == "uniform") {
    p.uniform_kernel = 1;
  } else {
    try {
      std::size_t used = 0;
      p.sigma = std::stod(v.sigma, &used);
      if (used != v.sigma.size()) throw std::invalid_argument(v.sigma);
    } catch (const std::exception&) {
      throw CommandError("--sigma must be a positive number or 'uniform'");
    }
  }
  if (v.upsample == "nearest")
    p.upsample = KMN_UPSAMPLE_NEAREST;
  else if (v.upsample == "bilinear")
    p.upsample = KMN_UPSAMPLE_BILINEAR;
  else
    throw CommandError("--upsample must be nearest or bilinear");
  p.memory_stride = v.stride;
  p.encoder_stride = v.encoder_stride;
  p.key_dim = v.key_dim;
  if (v.key_gain > 0.0) p.key_gain = v.key_gain;
  p.out_dir = v.out.c_str();

  json echo = cfg;
  echo["mode"] = v.mode;
  echo["sigma"] = v.sigma;
  const std::string echo_text = echo.dump();
  p.config_json = echo_text.c_str();

  kmn_manifest* raw = nullptr;
  check(kmn_manifest_load(v.manifest.c_str(), &raw), "run");
  ManifestPtr m(raw);
  kmn_report* rep = nullptr;
  check(kmn_run(m.get(), &p, &rep), "run");
  ReportPtr report(rep);
  std::cout << (std::filesystem::path(v.out) / "report.json").string() << '\n';
  return 0;
}

struct EvalArgs {
  std::string pred, gt, out;
  int objects = 0;
  int tolerance = -1;
};

int cmd_eval(const EvalArgs& a) {
  kmn_report* rep = nullptr;
  check(kmn_eval_dirs(a.pred.c_str(), a.gt.c_str(), a.objects, a.tolerance, &rep), "eval");
  ReportPtr report(rep);
  if (!a.out.empty()) check(kmn_report_write(report.get(), a.out.c_str()), "eval");
  std::cout << kmn_report_json(report.get());
  return 0;
}

struct BenchArgs {
  std::string shapes = "1x2x2x2,2x24x24x128", json_out, csv_out;
  int reps = 5;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
};

int cmd_bench(const BenchArgs& a) {
  kmn_bench_params p;
  kmn_bench_params_init(&p);
  p.shapes = a.shapes.c_str();
  p.repetitions = a.reps;
  p.seed = a.seed;
  p.tolerance = a.tolerance;
  kmn_report* rep = nullptr;
  check(kmn_bench(&p, &rep), "bench");
  ReportPtr report(rep);
  std::cout << kmn_report_text(report.get(), "table");
  if (!a.json_out.empty()) check(kmn_report_write(report.get(), a.json_out.c_str()), "bench");
  if (!a.csv_out.empty()) write_text(a.csv_out, kmn_report_text(report.get(), "csv"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernelized memory read video object segmentation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kmn_version()));

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic sequence from one image and mask");
  synth->add_option("--image", sa.image, "Source image (P6 PPM)")->required()->check(CLI::ExistingFile);
  synth->add_option("--mask", sa.mask, "Source label mask (P5 PGM)")->required()->check(CLI::ExistingFile);
  synth->add_option("--out", sa.out, "Output directory")->required();
  sa.frames_opt = synth->add_option("--frames", sa.frames, "Number of frames")->check(CLI::Range(2, 10000));
  sa.seed_opt = synth->add_option("--seed", sa.seed, "Random seed");
  sa.hide_opt = synth->add_option("--hide-prob", sa.hide_prob, "Hide-and-Seek cell probability")
                    ->check(CLI::Range(0.0, 1.0));
  sa.grid_opt = synth->add_option("--grid", sa.grid, "Hide-and-Seek grid size")->check(CLI::PositiveNumber);
  synth->add_option("--config", sa.config, "JSON file overriding defaults")->check(CLI::ExistingFile);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Propagate the first-frame mask through a sequence");
  run->add_option("--manifest", ra.manifest, "Sequence manifest")->required();
  run->add_option("--out", ra.out, "Output directory for predictions")->required();
  ra.mode_opt = run->add_option("--mode", ra.mode, "Memory read: stm or kmn");
  ra.sigma_opt = run->add_option("--sigma", ra.sigma, "Gaussian std-dev in grid cells, or 'uniform'");
  ra.stride_opt = run->add_option("--stride", ra.stride, "Memory frame interval");
  ra.enc_opt = run->add_option("--encoder-stride", ra.encoder_stride, "Pixels per feature cell");
  ra.dim_opt = run->add_option("--key-dim", ra.key_dim, "Key descriptor size");
  ra.up_opt = run->add_option("--upsample", ra.upsample, "nearest or bilinear");
  ra.gain_opt = run->add_option("--key-gain", ra.key_gain, "Correlation gain")->check(CLI::PositiveNumber);
  run->add_option("--config", ra.config, "JSON file overriding defaults")->check(CLI::ExistingFile);

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval->add_option("--pred", ea.pred, "Directory of predicted PGM masks")->required();
  eval->add_option("--gt", ea.gt, "Directory of ground-truth PGM masks")->required();
  eval->add_option("--objects", ea.objects, "Object count (default: largest GT label)");
  eval->add_option("--tolerance", ea.tolerance, "Boundary tolerance in pixels (default: 0.8% of diagonal)");
  eval->add_option("--out", ea.out, "Write the metrics JSON here");

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time naive vs fast correlation behind an equivalence gate");
  bench->add_option("--shapes", ba.shapes, "Comma-separated TxHxWxD list");
  bench->add_option("--reps", ba.reps, "Timed repetitions per variant")->check(CLI::Range(3, 100000));
  bench->add_option("--seed", ba.seed, "Random seed");
  bench->add_option("--tolerance", ba.tolerance, "Relative equivalence tolerance");
  bench->add_option("--json", ba.json_out, "Write the JSON report here");
  bench->add_option("--csv", ba.csv_out, "Write a CSV report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*synth) return cmd_synth(sa);
    if (*run) return cmd_run(ra);
    if (*eval) return cmd_eval(ea);
    if (*bench) return cmd_bench(ba);
  } catch (const std::exception& e) {
    std::cerr << "kmn: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
