/*
 * Copyright 2026 The KMN-VOS Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef KMN_KMN_H_
#define KMN_KMN_H_

/*
 * C interface to the kernelized memory read library.
 *
 * Every call returns a kmn_status. On failure a human-readable message is
 * available from kmn_last_error() until the next failing call on the same
 * thread. Objects behind opaque handles are owned by the caller once
 * returned and must be released with the matching *_free function.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(KMN_BUILDING_LIBRARY)
#    define KMN_API __declspec(dllexport)
#  else
#    define KMN_API __declspec(dllimport)
#  endif
#else
#  define KMN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum kmn_status {
  KMN_OK = 0,
  KMN_ERROR_INVALID_ARGUMENT = 1,
  KMN_ERROR_SHAPE_MISMATCH = 2,
  KMN_ERROR_IO = 3,
  KMN_ERROR_FORMAT = 4,
  KMN_ERROR_INTERNAL = 5
} kmn_status;

typedef enum kmn_read_mode { KMN_READ_STM = 0, KMN_READ_KMN = 1 } kmn_read_mode;
typedef enum kmn_upsample { KMN_UPSAMPLE_NEAREST = 0, KMN_UPSAMPLE_BILINEAR = 1 } kmn_upsample;

KMN_API const char* kmn_version(void);
KMN_API const char* kmn_status_string(kmn_status status);
KMN_API const char* kmn_last_error(void);

/* Worker cap for parallel kernels; 0 restores the KMN_THREADS/hardware default. */
KMN_API void kmn_set_thread_count(unsigned count);
KMN_API unsigned kmn_thread_count(void);

/* ---- Dense kernels ---------------------------------------------------- */

/* out[T*H*W*H*W] = correlation of memory keys (T,H,W,D) with query keys (H,W,D). */
KMN_API kmn_status kmn_correlate(const double* memory_keys, size_t t, size_t h, size_t w, size_t d,
                                 const double* query_keys, int use_fast, double* out);

typedef struct kmn_read_params {
  kmn_read_mode mode;
  double sigma;       /* Gaussian std-dev in query cells */
  int uniform_kernel; /* nonzero: g == 1 */
  size_t key_dim;     /* KMN scores are scaled by 1/sqrt(key_dim) */
} kmn_read_params;

KMN_API void kmn_read_params_init(kmn_read_params* params);

/* out[H*W*V] = memory read of values (T,H,W,V) through correlation (T,H,W,H,W). */
KMN_API kmn_status kmn_read(const double* correlation, size_t t, size_t h, size_t w, const double* memory_values,
                            size_t v, const kmn_read_params* params, double* out);

/* out[T*H*W*2] = (row, col) of the best query cell per memory cell. */
KMN_API kmn_status kmn_memory_to_query_argmax(const double* correlation, size_t t, size_t h, size_t w, int* out);

/* Writes up to `capacity` indices; *count receives the full count. */
KMN_API kmn_status kmn_select_memory_frames(int t, int stride, int* out, size_t capacity, size_t* count);

/* ---- Reports ---------------------------------------------------------- */

typedef struct kmn_report kmn_report;

KMN_API const char* kmn_report_json(const kmn_report* report);
KMN_API kmn_status kmn_report_write(const kmn_report* report, const char* path);
KMN_API void kmn_report_free(kmn_report* report);

/* ---- Sequences -------------------------------------------------------- */

typedef struct kmn_manifest kmn_manifest;

KMN_API kmn_status kmn_manifest_load(const char* path, kmn_manifest** out);
KMN_API size_t kmn_manifest_frame_count(const kmn_manifest* manifest);
KMN_API int kmn_manifest_object_count(const kmn_manifest* manifest);
/* Path of the manifest file itself. */
KMN_API const char* kmn_manifest_path(const kmn_manifest* manifest);
KMN_API void kmn_manifest_free(kmn_manifest* manifest);

typedef struct kmn_synth_params {
  const char* image_path; /* P6 PPM */
  const char* mask_path;  /* P5 PGM labels */
  const char* out_dir;
  int frames;
  uint64_t seed;
  double hide_prob;
  int hide_grid;
  double rotation_deg[2];
  double scale[2];
  double translate_frac[2];
  double brightness[2];
  double contrast[2];
  double flip_prob;
} kmn_synth_params;

KMN_API void kmn_synth_params_init(kmn_synth_params* params);
KMN_API kmn_status kmn_synth(const kmn_synth_params* params, kmn_manifest** out);

typedef struct kmn_run_params {
  kmn_read_mode mode;
  double sigma;
  int uniform_kernel;
  int memory_stride;
  size_t encoder_stride;
  size_t key_dim;
  kmn_upsample upsample;
  double key_gain;
  const char* out_dir;
  const char* config_json; /* echoed into the report; may be NULL */
} kmn_run_params;

KMN_API void kmn_run_params_init(kmn_run_params* params);
/* Writes pred_XXX.pgm and report.json into params->out_dir. */
KMN_API kmn_status kmn_run(const kmn_manifest* manifest, const kmn_run_params* params, kmn_report** out);

/* Scores the sorted *.pgm files of pred_dir against those of gt_dir.
 * objects <= 0 uses the largest ground-truth label; tolerance < 0 uses the
 * default boundary tolerance. */
KMN_API kmn_status kmn_eval_dirs(const char* pred_dir, const char* gt_dir, int objects, int tolerance,
                                 kmn_report** out);

typedef struct kmn_bench_params {
  const char* shapes; /* comma-separated TxHxWxD list */
  int repetitions;
  uint64_t seed;
  double tolerance;
  double inject_fast_perturbation; /* test hook */
} kmn_bench_params;

KMN_API void kmn_bench_params_init(kmn_bench_params* params);
/* The report JSON has the timing document; format "table" or "csv" is
 * available through kmn_report_text. */
KMN_API kmn_status kmn_bench(const kmn_bench_params* params, kmn_report** out);
KMN_API const char* kmn_report_text(const kmn_report* report, const char* format);

#ifdef __cplusplus
}
#endif

#endif /* KMN_KMN_H_ */
