/*
 * Copyright 2026 The edgetouch Authors
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

#ifndef EDGETOUCH_H
#define EDGETOUCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(EDGETOUCH_BUILDING)
#define ET_API __attribute__((visibility("default")))
#else
#define ET_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every fallible call returns a status; on failure et_last_error() holds a
 * message for the calling thread. Handles are opaque and owned by the caller,
 * who releases them with the matching *_free function. */
typedef enum et_status {
  ET_OK = 0,
  ET_ERR_USAGE = 1,     /* invalid argument or call sequence */
  ET_ERR_DATA = 2,      /* unreadable, malformed or inconsistent input */
  ET_ERR_NUMERICAL = 3  /* solver or convergence failure */
} et_status;

#define ET_READINGS 72
#define ET_SAMPLE_FIELDS 75

typedef struct et_config et_config;
typedef struct et_dataset et_dataset;
typedef struct et_model et_model;
typedef struct et_plan et_plan;

ET_API const char* et_last_error(void);
ET_API const char* et_version(void);

/* ---- sensor configuration ---------------------------------------------- */

ET_API et_status et_config_default(et_config** out);
ET_API et_status et_config_load(const char* path, et_config** out);
ET_API et_status et_config_save(const et_config* config, const char* path);
/* Keys are the config-file keys, e.g. "slab_thickness_mm". */
ET_API et_status et_config_set(et_config* config, const char* key, const char* value);
ET_API et_status et_config_get(const et_config* config, const char* key, char* buf, size_t cap);
ET_API et_status et_config_hash(const et_config* config, char* buf, size_t cap);
ET_API void et_config_free(et_config* config);

/* ---- acquisition ------------------------------------------------------- */

typedef struct et_schedule {
  int hover; /* include hover points */
  double hover_start_mm;
  double hover_end_mm;
  double hover_step_mm;
  double contact_start_mm;
  double contact_end_mm;
  double contact_step_mm;
  int mirrored;
  double depth_jitter_mm;
} et_schedule;

ET_API void et_schedule_default(et_schedule* out);

/* One 9-state scan; readings are state-major (9 x 8). */
ET_API et_status et_scan(const et_config* config, double x_mm, double y_mm, double depth_mm,
                         uint64_t seed, double readings[ET_READINGS]);

ET_API et_status et_simulate_grid(const et_config* config, double spacing_mm, double margin_mm,
                                  const et_schedule* schedule, uint64_t seed, unsigned threads,
                                  et_dataset** out);
ET_API et_status et_simulate_random(const et_config* config, size_t count,
                                    const et_schedule* schedule, uint64_t seed, unsigned threads,
                                    et_dataset** out);
/* Explicit locations, xy holds count (x, y) pairs. */
ET_API et_status et_simulate_locations(const et_config* config, const double* xy, size_t count,
                                       const et_schedule* schedule, uint64_t seed,
                                       unsigned threads, et_dataset** out);

/* ---- datasets ---------------------------------------------------------- */

ET_API et_status et_dataset_load(const char* path, et_dataset** out);
ET_API et_status et_dataset_save(const et_dataset* dataset, const char* path);
ET_API size_t et_dataset_size(const et_dataset* dataset);
ET_API et_status et_dataset_sample(const et_dataset* dataset, size_t index,
                                   double fields[ET_SAMPLE_FIELDS]);
ET_API et_status et_dataset_hash(const et_dataset* dataset, char* buf, size_t cap);
ET_API uint64_t et_dataset_seed(const et_dataset* dataset);
ET_API void et_dataset_free(et_dataset* dataset);

/* ---- experiment plans -------------------------------------------------- */

typedef void (*et_progress_fn)(const char* message, void* user);

ET_API et_status et_plan_load(const char* path, et_plan** out);
ET_API et_status et_plan_replication(const char* output_dir, uint64_t seed, et_plan** out);
/* Overrides: "output_dir", "config", "rays_per_state", "noise_sigma". */
ET_API et_status et_plan_set(et_plan* plan, const char* key, const char* value);
ET_API et_status et_plan_save(const et_plan* plan, const char* path);
ET_API et_status et_plan_run(const et_plan* plan, unsigned threads, et_progress_fn progress,
                             void* user);
ET_API void et_plan_free(et_plan* plan);

/* ---- training ---------------------------------------------------------- */

typedef struct et_train_options {
  double svm_c;
  double svm_tolerance;
  int fixed_hyperparameters; /* nonzero: use lambda/gamma, skip grid search */
  double lambda;
  double gamma;
  double grid_min;
  double grid_max;
  size_t grid_points;
  size_t max_regression_samples;
  uint64_t seed;
  unsigned threads;
} et_train_options;

ET_API void et_train_options_default(et_train_options* out);
ET_API et_status et_train(const et_dataset* const* datasets, size_t count,
                          const et_train_options* options, et_model** out);
ET_API et_status et_model_load(const char* path, et_model** out);
ET_API et_status et_model_save(const et_model* model, const char* path);
/* Training report as JSON. *needed (optional) receives the full length + 1. */
ET_API et_status et_model_report(const et_model* model, char* buf, size_t cap, size_t* needed);
ET_API et_status et_model_hash(const et_model* model, char* buf, size_t cap);
ET_API void et_model_free(et_model* model);

/* ---- prediction and evaluation ----------------------------------------- */

typedef struct et_touch_report {
  int touch;
  double score;
  double x_mm;
  double y_mm;
  double depth_mm;
} et_touch_report;

ET_API et_status et_predict(const et_model* model, const double readings[ET_READINGS],
                            et_touch_report* out);

/* Writes <stem>.classification.txt, .regression.txt, .csv and .arrows.txt
 * into out_dir. Optional summary receives both tables as text. */
ET_API et_status et_evaluate(const et_model* model, const et_dataset* dataset,
                             double arrow_depth_mm, const char* out_dir, const char* stem,
                             char* summary, size_t cap, size_t* needed);

/* ---- thickness study --------------------------------------------------- */

/* Emitter and receiver are 1-based indices into the config. When dump_path
 * is non-null, per-path records are appended to it. */
ET_API et_status et_deadband_profile(const et_config* config, double thickness_mm,
                                     const double* depths_mm, size_t count, int emitter,
                                     int receiver, uint64_t seed, int direct_only,
                                     const char* dump_path, double* signal);
ET_API et_status et_find_flat_interval(const double* depths_mm, const double* signal,
                                       size_t count, double min_length_mm, double rel_tol,
                                       int* found, double* start_mm, double* end_mm);

#ifdef __cplusplus
}
#endif

#endif /* EDGETOUCH_H */
