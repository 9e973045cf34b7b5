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

#include "kmn/kmn.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <new>
#include <string>
#include <vector>

#include "json.hpp"

#include "kmn/bench.hpp"
#include "kmn/error.hpp"
#include "kmn/kernelized_read.hpp"
#include "kmn/memory_bank.hpp"
#include "kmn/metrics.hpp"
#include "kmn/parallel.hpp"
#include "kmn/propagation.hpp"
#include "kmn/synth_video.hpp"
#include "kmn/tensor.hpp"

struct kmn_report {
  std::string json;
  std::map<std::string, std::string> text;
};

struct kmn_manifest {
  kmn::SequenceManifest manifest;
  std::string path;
};

namespace {

thread_local std::string g_last_error;

kmn_status to_status(kmn::ErrorCode code) {
  switch (code) {
    case kmn::ErrorCode::InvalidArgument: return KMN_ERROR_INVALID_ARGUMENT;
    case kmn::ErrorCode::ShapeMismatch: return KMN_ERROR_SHAPE_MISMATCH;
    case kmn::ErrorCode::Io: return KMN_ERROR_IO;
    case kmn::ErrorCode::Format: return KMN_ERROR_FORMAT;
    case kmn::ErrorCode::Internal: return KMN_ERROR_INTERNAL;
  }
  return KMN_ERROR_INTERNAL;
}

template <typename F>
kmn_status guarded(F&& f) {
  try {
    f();
    return KMN_OK;
  } catch (const kmn::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return KMN_ERROR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return KMN_ERROR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return KMN_ERROR_INTERNAL;
  }
}

void require_ptr(const void* p, const char* name) {
  if (p == nullptr) kmn::fail(kmn::ErrorCode::InvalidArgument, std::string(name) + " is null");
}

std::vector<double> copy_in(const double* p, std::size_t n) { return std::vector<double>(p, p + n); }

kmn::ReadConfig read_config(const kmn_read_params& p) {
  kmn::ReadConfig cfg;
  cfg.sigma = p.uniform_kernel ? kmn::KernelSigma::uniform() : kmn::KernelSigma(p.sigma);
  cfg.key_dim = p.key_dim;
  cfg.validate();
  return cfg;
}

kmn::CorrelationMap correlation_in(const double* c, std::size_t t, std::size_t h, std::size_t w) {
  require_ptr(c, "correlation");
  if (t == 0 || h == 0 || w == 0) kmn::fail(kmn::ErrorCode::InvalidArgument, "zero correlation dimension");
  return kmn::CorrelationMap(t, h, w, copy_in(c, t * h * w * h * w));
}

std::vector<std::filesystem::path> pgm_files(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) kmn::fail(kmn::ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".pgm") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

kmn::Range range_of(const double r[2]) { return {r[0], r[1]}; }

}  // namespace

extern "C" {

const char* kmn_version(void) { return "1.0.0"; }

const char* kmn_status_string(kmn_status status) {
  switch (status) {
    case KMN_OK: return "ok";
    case KMN_ERROR_INVALID_ARGUMENT: return "invalid argument";
    case KMN_ERROR_SHAPE_MISMATCH: return "shape mismatch";
    case KMN_ERROR_IO: return "i/o error";
    case KMN_ERROR_FORMAT: return "format error";
    case KMN_ERROR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* kmn_last_error(void) { return g_last_error.c_str(); }

void kmn_set_thread_count(unsigned count) { kmn::set_thread_count(count); }
unsigned kmn_thread_count(void) { return kmn::thread_count(); }

kmn_status kmn_correlate(const double* memory_keys, size_t t, size_t h, size_t w, size_t d,
                         const double* query_keys, int use_fast, double* out) {
  return guarded([&] {
    require_ptr(memory_keys, "memory_keys");
    require_ptr(query_keys, "query_keys");
    require_ptr(out, "out");
    kmn::Grid4 km(t, h, w, d, copy_in(memory_keys, t * h * w * d));
    kmn::Grid3 kq(h, w, d, copy_in(query_keys, h * w * d));
    const auto c = use_fast ? kmn::correlate_fast(km, kq) : kmn::correlate_naive(km, kq);
    std::copy(c.data().begin(), c.data().end(), out);
  });
}

void kmn_read_params_init(kmn_read_params* params) {
  if (!params) return;
  params->mode = KMN_READ_KMN;
  params->sigma = 7.0;
  params->uniform_kernel = 0;
  params->key_dim = 12;
}

kmn_status kmn_read(const double* correlation, size_t t, size_t h, size_t w, const double* memory_values, size_t v,
                    const kmn_read_params* params, double* out) {
  return guarded([&] {
    require_ptr(params, "params");
    require_ptr(memory_values, "memory_values");
    require_ptr(out, "out");
    const auto c = correlation_in(correlation, t, h, w);
    kmn::Grid4 vals(t, h, w, v, copy_in(memory_values, t * h * w * v));
    kmn::Grid3 r;
    if (params->mode == KMN_READ_STM)
      r = kmn::read_stm(c, vals);
    else if (params->mode == KMN_READ_KMN)
      r = kmn::read_kmn(c, vals, read_config(*params));
    else
      kmn::fail(kmn::ErrorCode::InvalidArgument, "unknown read mode");
    std::copy(r.data().begin(), r.data().end(), out);
  });
}

kmn_status kmn_memory_to_query_argmax(const double* correlation, size_t t, size_t h, size_t w, int* out) {
  return guarded([&] {
    require_ptr(out, "out");
    const auto best = kmn::memory_to_query_argmax(correlation_in(correlation, t, h, w));
    for (std::size_t p = 0; p < best.size(); ++p) {
      out[2 * p] = best[p].y;
      out[2 * p + 1] = best[p].x;
    }
  });
}

kmn_status kmn_select_memory_frames(int t, int stride, int* out, size_t capacity, size_t* count) {
  return guarded([&] {
    require_ptr(count, "count");
    const auto sel = kmn::select_memory_frames(t, stride);
    *count = sel.size();
    if (out) std::copy_n(sel.begin(), std::min(capacity, sel.size()), out);
  });
}

const char* kmn_report_json(const kmn_report* report) { return report ? report->json.c_str() : ""; }

const char* kmn_report_text(const kmn_report* report, const char* format) {
  if (!report || !format) return "";
  auto it = report->text.find(format);
  return it == report->text.end() ? "" : it->second.c_str();
}

kmn_status kmn_report_write(const kmn_report* report, const char* path) {
  return guarded([&] {
    require_ptr(report, "report");
    require_ptr(path, "path");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) kmn::fail(kmn::ErrorCode::Io, std::string("cannot write ") + path);
    out << report->json;
    if (!out) kmn::fail(kmn::ErrorCode::Io, std::string("failed writing ") + path);
  });
}

void kmn_report_free(kmn_report* report) { delete report; }

kmn_status kmn_manifest_load(const char* path, kmn_manifest** out) {
  return guarded([&] {
    require_ptr(path, "path");
    require_ptr(out, "out");
    *out = new kmn_manifest{kmn::read_manifest(path), path};
  });
}

size_t kmn_manifest_frame_count(const kmn_manifest* m) { return m ? m->manifest.size() : 0; }
int kmn_manifest_object_count(const kmn_manifest* m) { return m ? m->manifest.objects : 0; }
const char* kmn_manifest_path(const kmn_manifest* m) { return m ? m->path.c_str() : ""; }
void kmn_manifest_free(kmn_manifest* m) { delete m; }

void kmn_synth_params_init(kmn_synth_params* p) {
  if (!p) return;
  const kmn::AffineRanges r;
  *p = kmn_synth_params{};
  p->frames = 3;
  p->seed = 0;
  p->hide_prob = 0.0;
  p->hide_grid = 24;
  p->rotation_deg[0] = r.rotation_deg.lo;
  p->rotation_deg[1] = r.rotation_deg.hi;
  p->scale[0] = r.scale.lo;
  p->scale[1] = r.scale.hi;
  p->translate_frac[0] = r.translate_frac.lo;
  p->translate_frac[1] = r.translate_frac.hi;
  p->brightness[0] = r.brightness.lo;
  p->brightness[1] = r.brightness.hi;
  p->contrast[0] = r.contrast.lo;
  p->contrast[1] = r.contrast.hi;
  p->flip_prob = r.flip_prob;
}

kmn_status kmn_synth(const kmn_synth_params* p, kmn_manifest** out) {
  return guarded([&] {
    require_ptr(p, "params");
    require_ptr(out, "out");
    require_ptr(p->image_path, "image_path");
    require_ptr(p->mask_path, "mask_path");
    require_ptr(p->out_dir, "out_dir");
    kmn::AffineRanges ranges{range_of(p->rotation_deg), range_of(p->scale), range_of(p->translate_frac),
                             range_of(p->brightness),   range_of(p->contrast), p->flip_prob};
    kmn::HideSeekConfig hs{p->hide_grid, p->hide_prob};
    hs.validate();
    const auto img = kmn::read_ppm(p->image_path);
    const auto mask = kmn::read_pgm(p->mask_path);
    auto m = kmn::synth_sequence(img, mask, p->frames, ranges, hs, p->seed, p->out_dir);
    const std::string path = (m.directory / kmn::kManifestFileName).string();
    *out = new kmn_manifest{std::move(m), path};
  });
}

void kmn_run_params_init(kmn_run_params* p) {
  if (!p) return;
  *p = kmn_run_params{};
  p->mode = KMN_READ_KMN;
  p->sigma = 7.0;
  p->uniform_kernel = 0;
  p->memory_stride = 5;
  p->encoder_stride = 16;
  p->key_dim = 12;
  p->upsample = KMN_UPSAMPLE_NEAREST;
  p->key_gain = kmn::kDefaultKeyGain;
  p->out_dir = nullptr;
  p->config_json = nullptr;
}

kmn_status kmn_run(const kmn_manifest* manifest, const kmn_run_params* p, kmn_report** out) {
  return guarded([&] {
    require_ptr(manifest, "manifest");
    require_ptr(p, "params");
    require_ptr(out, "out");
    require_ptr(p->out_dir, "out_dir");
    kmn::PropagationConfig cfg;
    if (p->mode != KMN_READ_STM && p->mode != KMN_READ_KMN)
      kmn::fail(kmn::ErrorCode::InvalidArgument, "unknown read mode");
    cfg.mode = p->mode == KMN_READ_STM ? kmn::ReadMode::Stm : kmn::ReadMode::Kmn;
    cfg.read.sigma = p->uniform_kernel ? kmn::KernelSigma::uniform() : kmn::KernelSigma(p->sigma);
    cfg.read.key_dim = p->key_dim;
    cfg.encoder.stride = p->encoder_stride;
    cfg.encoder.key_dim = p->key_dim;
    cfg.memory_stride = p->memory_stride;
    cfg.upsample = p->upsample == KMN_UPSAMPLE_BILINEAR ? kmn::UpsampleMode::Bilinear : kmn::UpsampleMode::Nearest;
    cfg.key_gain = p->key_gain;
    cfg.validate();
    auto report_cfg = nlohmann::json::object();
    if (p->config_json && *p->config_json) {
      try {
        report_cfg = nlohmann::json::parse(p->config_json);
      } catch (const nlohmann::json::exception& e) {
        kmn::fail(kmn::ErrorCode::Format, std::string("config_json: ") + e.what());
      }
    }
    report_cfg["key_gain"] = cfg.key_gain;
    report_cfg["memory_stride"] = cfg.memory_stride;
    report_cfg["encoder_stride"] = cfg.encoder.stride;
    report_cfg["key_dim"] = cfg.encoder.key_dim;
    report_cfg["upsample"] = std::string(kmn::to_string(cfg.upsample));

    // Fail with the offending path before any output is produced.
    const auto& m = manifest->manifest;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (!std::filesystem::exists(m.frame_path(i)))
        kmn::fail(kmn::ErrorCode::Io, "missing frame " + m.frame_path(i).string());
    }
    if (!std::filesystem::exists(m.mask_path(0)))
      kmn::fail(kmn::ErrorCode::Io, "missing ground-truth mask " + m.mask_path(0).string());

    const auto rep = kmn::run_sequence(m, cfg, p->out_dir, report_cfg.dump());
    *out = new kmn_report{rep.to_json(), {}};
  });
}

kmn_status kmn_eval_dirs(const char* pred_dir, const char* gt_dir, int objects, int tolerance, kmn_report** out) {
  return guarded([&] {
    require_ptr(pred_dir, "pred_dir");
    require_ptr(gt_dir, "gt_dir");
    require_ptr(out, "out");
    const auto pred_files = pgm_files(pred_dir);
    const auto gt_files = pgm_files(gt_dir);
    if (pred_files.size() != gt_files.size())
      kmn::fail(kmn::ErrorCode::InvalidArgument, "prediction directory has " + std::to_string(pred_files.size()) +
                                                     " masks but ground truth has " +
                                                     std::to_string(gt_files.size()));
    std::vector<kmn::LabelMask> pred, gt;
    for (const auto& f : pred_files) pred.push_back(kmn::read_pgm(f));
    for (const auto& f : gt_files) gt.push_back(kmn::read_pgm(f));
    int n_objects = objects;
    if (n_objects <= 0) {
      n_objects = 0;
      for (const auto& g : gt) n_objects = std::max<int>(n_objects, g.max_label());
      if (n_objects == 0) kmn::fail(kmn::ErrorCode::InvalidArgument, "ground truth contains no objects");
    }
    const auto rep = kmn::evaluate_sequence(pred, gt, n_objects, tolerance);
    *out = new kmn_report{rep.to_json(), {}};
  });
}

void kmn_bench_params_init(kmn_bench_params* p) {
  if (!p) return;
  p->shapes = "1x2x2x2,2x24x24x128";
  p->repetitions = 5;
  p->seed = 0;
  p->tolerance = 1e-6;
  p->inject_fast_perturbation = 0.0;
}

kmn_status kmn_bench(const kmn_bench_params* p, kmn_report** out) {
  return guarded([&] {
    require_ptr(p, "params");
    require_ptr(out, "out");
    require_ptr(p->shapes, "shapes");
    std::vector<kmn::BenchShape> shapes;
    std::string list = p->shapes, token;
    for (std::size_t i = 0; i <= list.size(); ++i) {
      if (i == list.size() || list[i] == ',') {
        if (!token.empty()) shapes.push_back(kmn::parse_bench_shape(token));
        token.clear();
      } else if (list[i] != ' ') {
        token += list[i];
      }
    }
    if (shapes.empty()) kmn::fail(kmn::ErrorCode::InvalidArgument, "no bench shapes given");
    kmn::EquivalenceOptions opts{p->tolerance, p->inject_fast_perturbation};
    const auto rep = kmn::bench_correlate(shapes, p->repetitions, p->seed, opts);
    *out = new kmn_report{rep.to_json(), {{"table", rep.to_table()}, {"csv", rep.to_csv()}}};
  });
}

}  // extern "C"
