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

#include "edgetouch.h"

#include <cstring>
#include <fstream>
#include <new>
#include <string>
#include <vector>

#include "edgetouch/config_io.hpp"
#include "edgetouch/error.hpp"
#include "edgetouch/evaluation.hpp"
#include "edgetouch/learning.hpp"
#include "edgetouch/plan.hpp"
#include "edgetouch/protocols.hpp"
#include "edgetouch/sensor.hpp"
#include "edgetouch/transport.hpp"

struct et_config {
  edgetouch::SensorConfig value;
};
struct et_dataset {
  edgetouch::Dataset value;
};
struct et_model {
  edgetouch::TwoStageModel value;
};
struct et_plan {
  edgetouch::ExperimentPlan value;
};

namespace {

using namespace edgetouch;

thread_local std::string g_last_error;

et_status fail(et_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
et_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ET_OK;
  } catch (const Error& e) {
    return fail(static_cast<et_status>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ET_ERR_NUMERICAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ET_ERR_DATA, e.what());
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr)
    throw_invalid(std::string(what) + " must not be null");
}

void copy_out(const std::string& s, char* buf, std::size_t cap, std::size_t* needed) {
  if (needed)
    *needed = s.size() + 1;
  if (buf == nullptr && cap == 0 && needed)
    return;
  need(buf, "output buffer");
  if (cap < s.size() + 1)
    throw_invalid("output buffer too small (" + std::to_string(s.size() + 1) + " bytes needed)");
  std::memcpy(buf, s.c_str(), s.size() + 1);
}

SweepSchedule to_schedule(const et_schedule* s) {
  SweepSchedule out;
  if (s == nullptr)
    return out;
  out.hover = s->hover != 0;
  out.hover_start = s->hover_start_mm;
  out.hover_end = s->hover_end_mm;
  out.hover_step = s->hover_step_mm;
  out.contact_start = s->contact_start_mm;
  out.contact_end = s->contact_end_mm;
  out.contact_step = s->contact_step_mm;
  out.mirrored = s->mirrored != 0;
  out.depth_jitter = s->depth_jitter_mm;
  return out;
}

template <typename T, typename V>
T* make_handle(V&& value) {
  return new T{std::forward<V>(value)};
}

}  // namespace

extern "C" {

const char* et_last_error(void) { return g_last_error.c_str(); }

const char* et_version(void) { return "1.0.0"; }

et_status et_config_default(et_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = make_handle<et_config>(SensorConfig::default_config());
  });
}

et_status et_config_load(const char* path, et_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle<et_config>(load_config(path));
  });
}

et_status et_config_save(const et_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    save_config(config->value, path);
  });
}

et_status et_config_set(et_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    SensorConfig next = config->value;
    set_config_value(next, key, value);
    if (std::strcmp(key, "slab_thickness_mm") == 0) {
      // Components stay centred at mid-height.
      const double z = 0.5 * next.surface.slab_thickness;
      for (auto& e : next.emitters)
        e.position.z = z;
      for (auto& r : next.receivers)
        r.position.z = z;
    }
    validate(next);
    config->value = next;
  });
}

et_status et_config_get(const et_config* config, const char* key, char* buf, size_t cap) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    copy_out(get_config_value(config->value, key), buf, cap, nullptr);
  });
}

et_status et_config_hash(const et_config* config, char* buf, size_t cap) {
  return guarded([&] {
    need(config, "config");
    copy_out(config_hash(config->value), buf, cap, nullptr);
  });
}

void et_config_free(et_config* config) { delete config; }

void et_schedule_default(et_schedule* out) {
  if (out == nullptr)
    return;
  const SweepSchedule s;
  out->hover = s.hover ? 1 : 0;
  out->hover_start_mm = s.hover_start;
  out->hover_end_mm = s.hover_end;
  out->hover_step_mm = s.hover_step;
  out->contact_start_mm = s.contact_start;
  out->contact_end_mm = s.contact_end;
  out->contact_step_mm = s.contact_step;
  out->mirrored = s.mirrored ? 1 : 0;
  out->depth_jitter_mm = s.depth_jitter;
}

et_status et_scan(const et_config* config, double x_mm, double y_mm, double depth_mm,
                  uint64_t seed, double readings[ET_READINGS]) {
  return guarded([&] {
    need(config, "config");
    need(readings, "readings");
    const SignalFrame f = scan(config->value, IndenterState{x_mm, y_mm, depth_mm}, seed);
    std::copy(f.readings.begin(), f.readings.end(), readings);
  });
}

et_status et_simulate_grid(const et_config* config, double spacing_mm, double margin_mm,
                           const et_schedule* schedule, uint64_t seed, unsigned threads,
                           et_dataset** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    const SensorConfig& c = config->value;
    const auto pattern =
        grid_pattern(c.cavity_side, c.active_area_side, spacing_mm, margin_mm, seed);
    *out = make_handle<et_dataset>(collect(c, pattern, "grid", to_schedule(schedule), seed, threads));
  });
}

et_status et_simulate_random(const et_config* config, size_t count, const et_schedule* schedule,
                             uint64_t seed, unsigned threads, et_dataset** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    const SensorConfig& c = config->value;
    const auto pattern = random_pattern(count, c.cavity_side, c.active_area_side, seed);
    *out = make_handle<et_dataset>(
        collect(c, pattern, "random", to_schedule(schedule), seed, threads));
  });
}

et_status et_simulate_locations(const et_config* config, const double* xy, size_t count,
                                const et_schedule* schedule, uint64_t seed, unsigned threads,
                                et_dataset** out) {
  return guarded([&] {
    need(config, "config");
    need(xy, "xy");
    need(out, "out");
    std::vector<Location> pattern(count);
    for (std::size_t i = 0; i < count; ++i)
      pattern[i] = {xy[2 * i], xy[2 * i + 1]};
    *out = make_handle<et_dataset>(
        collect(config->value, pattern, "explicit", to_schedule(schedule), seed, threads));
  });
}

et_status et_dataset_load(const char* path, et_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle<et_dataset>(load_dataset(path));
  });
}

et_status et_dataset_save(const et_dataset* dataset, const char* path) {
  return guarded([&] {
    need(dataset, "dataset");
    need(path, "path");
    save_dataset(dataset->value, path);
  });
}

size_t et_dataset_size(const et_dataset* dataset) {
  return dataset ? dataset->value.samples.size() : 0;
}

et_status et_dataset_sample(const et_dataset* dataset, size_t index,
                            double fields[ET_SAMPLE_FIELDS]) {
  return guarded([&] {
    need(dataset, "dataset");
    need(fields, "fields");
    if (index >= dataset->value.samples.size())
      throw_invalid("sample index out of range");
    const Sample& s = dataset->value.samples[index];
    fields[0] = s.x;
    fields[1] = s.y;
    fields[2] = s.d;
    std::copy(s.readings.begin(), s.readings.end(), fields + 3);
  });
}

et_status et_dataset_hash(const et_dataset* dataset, char* buf, size_t cap) {
  return guarded([&] {
    need(dataset, "dataset");
    copy_out(dataset->value.metadata.config_hash, buf, cap, nullptr);
  });
}

uint64_t et_dataset_seed(const et_dataset* dataset) {
  return dataset ? dataset->value.metadata.seed : 0;
}

void et_dataset_free(et_dataset* dataset) { delete dataset; }

et_status et_plan_load(const char* path, et_plan** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle<et_plan>(load_plan(path));
  });
}

et_status et_plan_replication(const char* output_dir, uint64_t seed, et_plan** out) {
  return guarded([&] {
    need(output_dir, "output_dir");
    need(out, "out");
    *out = make_handle<et_plan>(replication_plan(output_dir, seed));
  });
}

et_status et_plan_set(et_plan* plan, const char* key, const char* value) {
  return guarded([&] {
    need(plan, "plan");
    need(key, "key");
    need(value, "value");
    ExperimentPlan& p = plan->value;
    const std::string k = key;
    if (k == "output_dir") {
      p.output_dir = value;
    } else if (k == "config") {
      if (!std::filesystem::exists(value))
        throw_data(std::string("config file does not exist: ") + value);
      p.config_path = value;
    } else if (k == "rays_per_state") {
      const double v = parse_double(value, "rays_per_state");
      if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v)))
        throw_invalid("rays_per_state must be a positive integer");
      p.rays_per_state = static_cast<std::size_t>(v);
    } else if (k == "noise_sigma") {
      const double v = parse_double(value, "noise_sigma");
      if (!(v >= 0.0))
        throw_invalid("noise_sigma must be non-negative");
      p.noise_sigma = v;
    } else {
      throw_invalid("unknown plan override '" + k + "'");
    }
  });
}

et_status et_plan_save(const et_plan* plan, const char* path) {
  return guarded([&] {
    need(plan, "plan");
    need(path, "path");
    std::ofstream out(path, std::ios::binary);
    if (!out)
      throw_data(std::string("cannot write ") + path);
    out << format_plan(plan->value);
    if (!out)
      throw_data(std::string("write failed: ") + path);
  });
}

et_status et_plan_run(const et_plan* plan, unsigned threads, et_progress_fn progress, void* user) {
  return guarded([&] {
    need(plan, "plan");
    Progress cb;
    if (progress)
      cb = [&](const std::string& msg) { progress(msg.c_str(), user); };
    run_simulation(plan->value, threads, cb);
  });
}

void et_plan_free(et_plan* plan) { delete plan; }

void et_train_options_default(et_train_options* out) {
  if (out == nullptr)
    return;
  const TrainOptions t;
  out->svm_c = t.svm.c;
  out->svm_tolerance = t.svm.tolerance;
  out->fixed_hyperparameters = 0;
  out->lambda = 2.15e-4;
  out->gamma = 5.45e-4;
  out->grid_min = t.lambda_grid.front();
  out->grid_max = t.lambda_grid.back();
  out->grid_points = t.lambda_grid.size();
  out->max_regression_samples = t.max_regression_samples;
  out->seed = t.seed;
  out->threads = t.threads;
}

et_status et_train(const et_dataset* const* datasets, size_t count,
                   const et_train_options* options, et_model** out) {
  return guarded([&] {
    need(datasets, "datasets");
    need(out, "out");
    et_train_options o;
    et_train_options_default(&o);
    if (options)
      o = *options;
    TrainOptions t;
    t.svm.c = o.svm_c;
    t.svm.tolerance = o.svm_tolerance;
    if (o.fixed_hyperparameters) {
      t.lambda = o.lambda;
      t.gamma = o.gamma;
    }
    t.lambda_grid = log_grid(o.grid_min, o.grid_max, o.grid_points);
    t.gamma_grid = t.lambda_grid;
    t.max_regression_samples = o.max_regression_samples;
    t.seed = o.seed;
    t.threads = o.threads;
    std::vector<Dataset> sets;
    sets.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      need(datasets[i], "dataset");
      sets.push_back(datasets[i]->value);
    }
    *out = make_handle<et_model>(train_two_stage(sets, t));
  });
}

et_status et_model_load(const char* path, et_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = make_handle<et_model>(load_model(path));
  });
}

et_status et_model_save(const et_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    save_model(model->value, path);
  });
}

et_status et_model_report(const et_model* model, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    need(model, "model");
    copy_out(report_to_json(model->value.report), buf, cap, needed);
  });
}

et_status et_model_hash(const et_model* model, char* buf, size_t cap) {
  return guarded([&] {
    need(model, "model");
    copy_out(model->value.config_hash, buf, cap, nullptr);
  });
}

void et_model_free(et_model* model) { delete model; }

et_status et_predict(const et_model* model, const double readings[ET_READINGS],
                     et_touch_report* out) {
  return guarded([&] {
    need(model, "model");
    need(readings, "readings");
    need(out, "out");
    SignalFrame f;
    std::copy(readings, readings + ET_READINGS, f.readings.begin());
    const TouchReport r = predict(model->value, f);
    out->touch = r.touch ? 1 : 0;
    out->score = r.score;
    out->x_mm = r.x;
    out->y_mm = r.y;
    out->depth_mm = r.d;
  });
}

et_status et_evaluate(const et_model* model, const et_dataset* dataset, double arrow_depth_mm,
                      const char* out_dir, const char* stem, char* summary, size_t cap,
                      size_t* needed) {
  return guarded([&] {
    need(model, "model");
    need(dataset, "dataset");
    need(out_dir, "out_dir");
    need(stem, "stem");
    const EvaluationResult r = evaluate(model->value, dataset->value, arrow_depth_mm);
    write_evaluation(r, dataset->value, out_dir, stem);
    if (summary || needed) {
      const std::string text =
          render_classification_table(r.classification,
                                      "Touch vs. no touch classification success rate") +
          "\n" +
          render_regression_table(r.regression, r.regression_slices,
                                  "Localization and depth accuracy (mm)");
      copy_out(text, summary, cap, needed);
    }
  });
}

et_status et_deadband_profile(const et_config* config, double thickness_mm,
                              const double* depths_mm, size_t count, int emitter, int receiver,
                              uint64_t seed, int direct_only, const char* dump_path,
                              double* signal) {
  return guarded([&] {
    need(config, "config");
    need(depths_mm, "depths");
    need(signal, "signal");
    if (emitter < 1 || emitter > kComponents || receiver < 1 || receiver > kComponents)
      throw_invalid("emitter and receiver indices must lie in 1..8");
    if (!(thickness_mm > 0.0))
      throw_invalid("thickness must be positive");
    const SensorConfig& c = config->value;
    const Emitter& e = c.emitters[static_cast<std::size_t>(emitter - 1)];
    const Receiver& r = c.receivers[static_cast<std::size_t>(receiver - 1)];
    const CavityGeometry g = cavity_geometry(c);
    const TransportMode mode = direct_only ? TransportMode::kDirectOnly : TransportMode::kFull;
    const std::span<const double> depths(depths_mm, count);
    if (dump_path == nullptr) {
      const DeadbandSeries s = deadband_profile(thickness_mm, depths, e, r, g, seed, mode);
      std::copy(s.signal.begin(), s.signal.end(), signal);
      return;
    }
    std::ofstream dump(dump_path, std::ios::binary | std::ios::app);
    if (!dump)
      throw_data(std::string("cannot write ") + dump_path);
    for (std::size_t i = 0; i < count; ++i) {
      if (i > 0 && !(depths_mm[i] > depths_mm[i - 1]))
        throw_invalid("deadband depths must be ascending");
      const std::string prefix =
          format_double(thickness_mm) + " " + format_double(depths_mm[i]) + " ";
      const PathSink sink = [&](const PathRecord& rec) {
        dump << prefix << rec.ray << " " << rec.bounces << " " << to_string(rec.cause) << " "
             << rec.receiver << " " << format_double(rec.power) << "\n";
      };
      const DeadbandSeries s = deadband_profile(thickness_mm, depths.subspan(i, 1), e, r, g,
                                                seed, mode, &sink);
      signal[i] = s.signal[0];
    }
    if (!dump)
      throw_data(std::string("write failed: ") + dump_path);
  });
}

et_status et_find_flat_interval(const double* depths_mm, const double* signal, size_t count,
                                double min_length_mm, double rel_tol, int* found,
                                double* start_mm, double* end_mm) {
  return guarded([&] {
    need(depths_mm, "depths");
    need(signal, "signal");
    need(found, "found");
    const auto f = find_flat_interval(std::span<const double>(depths_mm, count),
                                      std::span<const double>(signal, count), min_length_mm,
                                      rel_tol);
    *found = f ? 1 : 0;
    if (f && start_mm)
      *start_mm = f->start;
    if (f && end_mm)
      *end_mm = f->end;
  });
}

}  // extern "C"
