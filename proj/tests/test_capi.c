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

/* Exercises the C API from plain C. */

#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "edgetouch.h"

static int failures = 0;

#define EXPECT(cond)                                                   \
  do {                                                                 \
    if (!(cond)) {                                                     \
      fprintf(stderr, "%s:%d: expectation failed: %s (%s)\n", __FILE__, \
              __LINE__, #cond, et_last_error());                       \
      ++failures;                                                      \
    }                                                                  \
  } while (0)

static void test_config(const char* dir) {
  et_config* cfg = NULL;
  char buf[256];
  char path[512];
  EXPECT(et_config_default(&cfg) == ET_OK);
  EXPECT(et_config_get(cfg, "slab_thickness_mm", buf, sizeof buf) == ET_OK);
  EXPECT(strcmp(buf, "8") == 0);
  EXPECT(et_config_set(cfg, "slab_thickness_mm", "10") == ET_OK);
  EXPECT(et_config_get(cfg, "emitter.1.position_mm", buf, sizeof buf) == ET_OK);
  EXPECT(strstr(buf, " 5") != NULL); /* re-centred at mid-height */
  EXPECT(et_config_set(cfg, "no_such_key", "1") == ET_ERR_DATA);
  EXPECT(strlen(et_last_error()) > 0);
  EXPECT(et_config_set(cfg, "wall_reflectance", "7") != ET_OK);
  EXPECT(et_config_get(cfg, "wall_reflectance", buf, sizeof buf) == ET_OK);
  EXPECT(strcmp(buf, "0.2") == 0); /* rejected update left no trace */
  EXPECT(et_config_hash(cfg, buf, 4) == ET_ERR_USAGE);
  EXPECT(et_config_hash(cfg, buf, sizeof buf) == ET_OK);
  EXPECT(strlen(buf) == 16);

  snprintf(path, sizeof path, "%s/capi.cfg", dir);
  EXPECT(et_config_save(cfg, path) == ET_OK);
  et_config* back = NULL;
  EXPECT(et_config_load(path, &back) == ET_OK);
  char h2[32];
  EXPECT(et_config_hash(back, h2, sizeof h2) == ET_OK);
  EXPECT(strcmp(buf, h2) == 0);
  EXPECT(et_config_load("/nonexistent/x.cfg", &back) == ET_ERR_DATA);
  et_config_free(back);
  et_config_free(cfg);
  EXPECT(et_config_default(NULL) == ET_ERR_USAGE);
}

static void test_pipeline(const char* dir) {
  et_config* cfg = NULL;
  EXPECT(et_config_default(&cfg) == ET_OK);
  for (int i = 1; i <= 8; ++i) {
    char key[64];
    snprintf(key, sizeof key, "emitter.%d.rays_per_state", i);
    EXPECT(et_config_set(cfg, key, "300") == ET_OK);
  }
  et_schedule sched;
  et_schedule_default(&sched);
  EXPECT(sched.contact_end_mm == 5.0);
  sched.hover_start_mm = -2.0;
  sched.contact_end_mm = 1.0;

  double readings[ET_READINGS];
  EXPECT(et_scan(cfg, 16.0, 16.0, 0.5, 3, readings) == ET_OK);
  EXPECT(readings[0] >= 0.0);
  EXPECT(et_scan(cfg, 100.0, 16.0, 0.5, 3, readings) != ET_OK);

  et_dataset* train = NULL;
  EXPECT(et_simulate_random(cfg, 12, &sched, 4, 1, &train) == ET_OK);
  EXPECT(et_dataset_size(train) == 12 * (2 + 11 + 10 + 2));
  double fields[ET_SAMPLE_FIELDS];
  EXPECT(et_dataset_sample(train, 0, fields) == ET_OK);
  EXPECT(fields[2] == -2.0);
  EXPECT(et_dataset_sample(train, 100000, fields) == ET_ERR_USAGE);
  EXPECT(et_dataset_seed(train) == 4);

  char path[512];
  snprintf(path, sizeof path, "%s/capi.dataset", dir);
  EXPECT(et_dataset_save(train, path) == ET_OK);
  et_dataset* reloaded = NULL;
  EXPECT(et_dataset_load(path, &reloaded) == ET_OK);
  EXPECT(et_dataset_size(reloaded) == et_dataset_size(train));

  et_train_options opt;
  et_train_options_default(&opt);
  opt.fixed_hyperparameters = 1;
  opt.lambda = 1e-3;
  opt.gamma = 1e-2;
  opt.threads = 1;
  et_model* model = NULL;
  const et_dataset* sets[1] = {reloaded};
  EXPECT(et_train(sets, 1, &opt, &model) == ET_OK);

  size_t needed = 0;
  EXPECT(et_model_report(model, NULL, 0, &needed) == ET_OK);
  EXPECT(needed > 10);
  char* report = (char*)malloc(needed);
  EXPECT(et_model_report(model, report, needed, &needed) == ET_OK);
  EXPECT(strstr(report, "\"grid_searched\": false") != NULL);
  free(report);

  et_touch_report tr;
  EXPECT(et_dataset_sample(train, 20, fields) == ET_OK);
  EXPECT(et_predict(model, fields + 3, &tr) == ET_OK);
  EXPECT(isfinite(tr.score));

  snprintf(path, sizeof path, "%s/capi.model", dir);
  EXPECT(et_model_save(model, path) == ET_OK);
  et_model* model2 = NULL;
  EXPECT(et_model_load(path, &model2) == ET_OK);
  et_touch_report tr2;
  EXPECT(et_predict(model2, fields + 3, &tr2) == ET_OK);
  EXPECT(tr.score == tr2.score && tr.x_mm == tr2.x_mm && tr.depth_mm == tr2.depth_mm);

  EXPECT(et_evaluate(model, train, 1.0, dir, "capi-eval", NULL, 0, &needed) == ET_OK);
  EXPECT(needed > 100);

  /* Config hash mismatch between model and data. */
  EXPECT(et_config_set(cfg, "wall_reflectance", "0.3") == ET_OK);
  et_dataset* other = NULL;
  EXPECT(et_simulate_random(cfg, 1, &sched, 4, 1, &other) == ET_OK);
  EXPECT(et_evaluate(model, other, 1.0, dir, "mismatch", NULL, 0, &needed) == ET_ERR_DATA);
  const et_dataset* mixed[2] = {train, other};
  et_model* bad = NULL;
  EXPECT(et_train(mixed, 2, &opt, &bad) == ET_ERR_DATA);

  et_dataset_free(other);
  et_model_free(model2);
  et_model_free(model);
  et_dataset_free(reloaded);
  et_dataset_free(train);
  et_config_free(cfg);
}

static void test_deadband(const char* dir) {
  et_config* cfg = NULL;
  EXPECT(et_config_default(&cfg) == ET_OK);
  EXPECT(et_config_set(cfg, "emitter.8.rays_per_state", "500") == ET_OK);
  const double depths[3] = {0.0, 0.5, 1.0};
  double a[3], b[3];
  char dump[512];
  snprintf(dump, sizeof dump, "%s/paths.txt", dir);
  remove(dump);
  EXPECT(et_deadband_profile(cfg, 8.0, depths, 3, 8, 3, 9, 0, NULL, a) == ET_OK);
  EXPECT(et_deadband_profile(cfg, 8.0, depths, 3, 8, 3, 9, 0, dump, b) == ET_OK);
  EXPECT(memcmp(a, b, sizeof a) == 0);
  FILE* f = fopen(dump, "r");
  EXPECT(f != NULL);
  if (f) {
    int lines = 0, c;
    while ((c = fgetc(f)) != EOF)
      lines += c == '\n';
    fclose(f);
    EXPECT(lines == 1500);
  }
  EXPECT(et_deadband_profile(cfg, 8.0, depths, 3, 9, 3, 9, 0, NULL, a) == ET_ERR_USAGE);
  int found = -1;
  double s = 0, e = 0;
  EXPECT(et_find_flat_interval(depths, a, 3, 1.0, 0.02, &found, &s, &e) == ET_OK);
  EXPECT(found == 0 || found == 1);
  et_config_free(cfg);
}

int main(int argc, char** argv) {
  const char* dir = argc > 1 ? argv[1] : ".";
  EXPECT(strcmp(et_version(), "") != 0);
  test_config(dir);
  test_pipeline(dir);
  test_deadband(dir);
  if (failures)
    fprintf(stderr, "%d expectation(s) failed\n", failures);
  else
    printf("C API: all expectations met\n");
  return failures ? 1 : 0;
}
