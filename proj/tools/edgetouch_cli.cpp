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

// edgetouch command-line driver. Talks to the library only through the C API.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "edgetouch.h"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Failure {
  int code;
  std::string message;
};

void check(et_status s) {
  if (s != ET_OK)
    throw Failure{static_cast<int>(s), et_last_error()};
}

[[noreturn]] void usage(const std::string& message) { throw Failure{kUsage, message}; }
[[noreturn]] void data_error(const std::string& message) { throw Failure{kData, message}; }

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<et_config, Deleter<et_config, et_config_free>>;
using DatasetPtr = std::unique_ptr<et_dataset, Deleter<et_dataset, et_dataset_free>>;
using ModelPtr = std::unique_ptr<et_model, Deleter<et_model, et_model_free>>;
using PlanPtr = std::unique_ptr<et_plan, Deleter<et_plan, et_plan_free>>;

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

ConfigPtr open_config(const std::string& path) {
  et_config* c = nullptr;
  if (path.empty())
    check(et_config_default(&c));
  else
    check(et_config_load(path.c_str(), &c));
  return ConfigPtr(c);
}

void set_rays(et_config* c, std::size_t rays) {
  for (int i = 1; i <= 8; ++i) {
    const std::string key = "emitter." + std::to_string(i) + ".rays_per_state";
    check(et_config_set(c, key.c_str(), std::to_string(rays).c_str()));
  }
}

std::string config_hash(const et_config* c) {
  char buf[64];
  check(et_config_hash(c, buf, sizeof buf));
  return buf;
}

DatasetPtr open_dataset(const std::string& path) {
  et_dataset* d = nullptr;
  check(et_dataset_load(path.c_str(), &d));
  return DatasetPtr(d);
}

ModelPtr open_model(const std::string& path) {
  if (path.empty())
    usage("--model must not be empty");
  et_model* m = nullptr;
  check(et_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    data_error("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    data_error("cannot write " + path.string());
  return out;
}

void progress_line(const char* message, void*) {
  std::fprintf(stderr, "%s\n", message);
}

// simulate ------------------------------------------------------------------

struct SimulateArgs {
  std::string plan;
  std::string preset;
  std::string out;
  std::string config;
  std::string pattern;
  std::string save_plan;
  std::uint64_t seed = 2017;
  double ambient = 0.0;
  double noise = -1.0;
  std::size_t rays = 0;
  std::size_t count = 100;
  double spacing = 2.0;
  double margin = 3.0;
  unsigned threads = 0;
};

int run_plan(const SimulateArgs& a) {
  et_plan* raw = nullptr;
  if (!a.plan.empty()) {
    if (!a.preset.empty())
      usage("--plan and --preset are exclusive");
    check(et_plan_load(a.plan.c_str(), &raw));
  } else {
    if (a.preset != "replication")
      usage("unknown preset '" + a.preset + "'");
    if (a.out.empty())
      usage("--preset needs --out");
    check(et_plan_replication(a.out.c_str(), a.seed, &raw));
  }
  PlanPtr plan(raw);
  if (!a.out.empty())
    check(et_plan_set(plan.get(), "output_dir", a.out.c_str()));
  if (!a.config.empty())
    check(et_plan_set(plan.get(), "config", a.config.c_str()));
  if (a.rays > 0)
    check(et_plan_set(plan.get(), "rays_per_state", std::to_string(a.rays).c_str()));
  if (a.noise >= 0.0)
    check(et_plan_set(plan.get(), "noise_sigma", fmt(a.noise).c_str()));
  if (!a.save_plan.empty())
    check(et_plan_save(plan.get(), a.save_plan.c_str()));
  check(et_plan_run(plan.get(), a.threads, progress_line, nullptr));
  return kOk;
}

int cmd_simulate(const SimulateArgs& a) {
  if (!a.plan.empty() || !a.preset.empty())
    return run_plan(a);
  if (a.pattern.empty())
    usage("one of --plan, --preset or --pattern is required");
  if (a.out.empty())
    usage("--out is required");
  ConfigPtr cfg = open_config(a.config);
  check(et_config_set(cfg.get(), "ambient_level", fmt(a.ambient).c_str()));
  if (a.noise >= 0.0)
    check(et_config_set(cfg.get(), "noise_sigma", fmt(a.noise).c_str()));
  if (a.rays > 0)
    set_rays(cfg.get(), a.rays);
  et_schedule schedule;
  et_schedule_default(&schedule);
  et_dataset* raw = nullptr;
  if (a.pattern == "grid")
    check(et_simulate_grid(cfg.get(), a.spacing, a.margin, &schedule, a.seed, a.threads, &raw));
  else if (a.pattern == "random")
    check(et_simulate_random(cfg.get(), a.count, &schedule, a.seed, a.threads, &raw));
  else
    usage("--pattern must be grid or random");
  DatasetPtr ds(raw);
  ensure_dir(a.out);
  std::string level = fmt(a.ambient);
  std::replace(level.begin(), level.end(), '.', 'p');
  const fs::path path =
      fs::path(a.out) / (a.pattern + "-ambient" + level + "-seed" + std::to_string(a.seed) + ".dataset");
  check(et_dataset_save(ds.get(), path.string().c_str()));
  std::cout << path.string() << " " << et_dataset_size(ds.get()) << " samples\n";
  return kOk;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
  std::vector<std::string> data;
  std::string out;
  std::string report;
  double lambda = std::nan("");
  double gamma = std::nan("");
  double svm_c = 0.0;
  double grid_min = 0.0, grid_max = 0.0;
  std::size_t grid_points = 0;
  std::size_t max_samples = 0;
  std::uint64_t seed = 2017;
  unsigned threads = 0;
};

std::string model_report(const et_model* m) {
  std::size_t needed = 0;
  check(et_model_report(m, nullptr, 0, &needed));
  std::string buf(needed, '\0');
  check(et_model_report(m, buf.data(), buf.size(), &needed));
  buf.resize(needed - 1);
  return buf;
}

int cmd_train(const TrainArgs& a) {
  if (std::isnan(a.lambda) != std::isnan(a.gamma))
    usage("--lambda and --gamma must be given together");
  std::vector<DatasetPtr> owned;
  std::vector<const et_dataset*> sets;
  for (const auto& p : a.data) {
    owned.push_back(open_dataset(p));
    sets.push_back(owned.back().get());
  }
  et_train_options o;
  et_train_options_default(&o);
  if (!std::isnan(a.lambda)) {
    o.fixed_hyperparameters = 1;
    o.lambda = a.lambda;
    o.gamma = a.gamma;
  }
  if (a.svm_c > 0.0)
    o.svm_c = a.svm_c;
  if (a.grid_min > 0.0)
    o.grid_min = a.grid_min;
  if (a.grid_max > 0.0)
    o.grid_max = a.grid_max;
  if (a.grid_points > 0)
    o.grid_points = a.grid_points;
  if (a.max_samples > 0)
    o.max_regression_samples = a.max_samples;
  o.seed = a.seed;
  o.threads = a.threads;

  et_model* raw = nullptr;
  check(et_train(sets.data(), sets.size(), &o, &raw));
  ModelPtr model(raw);
  const fs::path out = a.out;
  if (out.has_parent_path())
    ensure_dir(out.parent_path());
  check(et_model_save(model.get(), a.out.c_str()));
  const std::string report = model_report(model.get());
  const fs::path report_path = a.report.empty() ? fs::path(a.out + ".report.json") : fs::path(a.report);
  open_out(report_path) << report << "\n";
  std::cout << report << "\n";
  return kOk;
}

// eval ----------------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::vector<std::string> data;
  std::string out;
  double arrow_depth = 1.0;
};

int cmd_eval(const EvalArgs& a) {
  ModelPtr model = open_model(a.model);
  ensure_dir(a.out);
  for (const auto& p : a.data) {
    DatasetPtr ds = open_dataset(p);
    const std::string stem = fs::path(p).stem().string();
    std::size_t needed = 0;
    check(et_evaluate(model.get(), ds.get(), a.arrow_depth, a.out.c_str(), stem.c_str(), nullptr,
                      0, &needed));
    std::string summary(needed, '\0');
    check(et_evaluate(model.get(), ds.get(), a.arrow_depth, a.out.c_str(), stem.c_str(),
                      summary.data(), summary.size(), &needed));
    summary.resize(needed - 1);
    std::cout << "== " << stem << "\n" << summary << "\n";
  }
  return kOk;
}

// predict -------------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string data;
  std::string frames;
  std::string out;
};

void emit(std::ostream& os, const et_touch_report& r) {
  os << "{\"touch\":" << (r.touch ? "true" : "false") << ",\"score\":" << fmt(r.score);
  if (r.touch)
    os << ",\"x_mm\":" << fmt(r.x_mm) << ",\"y_mm\":" << fmt(r.y_mm)
       << ",\"depth_mm\":" << fmt(r.depth_mm);
  os << "}\n";
}

int cmd_predict(const PredictArgs& a) {
  if (a.data.empty() == a.frames.empty())
    usage("exactly one of --data or --frames is required");
  ModelPtr model = open_model(a.model);
  std::ofstream file;
  if (!a.out.empty())
    file = open_out(a.out);
  std::ostream& os = a.out.empty() ? std::cout : file;
  et_touch_report r;
  if (!a.data.empty()) {
    DatasetPtr ds = open_dataset(a.data);
    double fields[ET_SAMPLE_FIELDS];
    for (std::size_t i = 0; i < et_dataset_size(ds.get()); ++i) {
      check(et_dataset_sample(ds.get(), i, fields));
      check(et_predict(model.get(), fields + 3, &r));
      emit(os, r);
    }
    return kOk;
  }
  std::ifstream in(a.frames);
  if (!in)
    data_error("cannot read " + a.frames);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ss(line);
    std::vector<double> v;
    std::string tok;
    while (ss >> tok) {
      double x = 0.0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        data_error(a.frames + ":" + std::to_string(line_no) + ": bad number '" + tok + "'");
      v.push_back(x);
    }
    if (v.size() != ET_READINGS)
      data_error(a.frames + ":" + std::to_string(line_no) + ": expected 72 readings, got " +
                 std::to_string(v.size()));
    check(et_predict(model.get(), v.data(), &r));
    emit(os, r);
  }
  return kOk;
}

// sweep-thickness -----------------------------------------------------------

struct SweepArgs {
  std::vector<double> thickness;
  std::vector<double> depths;
  double depth_max = 3.0;
  double depth_step = 0.1;
  int emitter = 8;
  int receiver = 3;
  std::uint64_t seed = 2017;
  std::string config;
  std::string out;
  std::string dump_paths;
  std::size_t rays = 0;
  bool direct_only = false;
  double flat_length = 1.0;
  double flat_tol = 0.02;
};

int cmd_sweep(const SweepArgs& a) {
  std::vector<double> depths = a.depths;
  if (depths.empty()) {
    if (!(a.depth_step > 0.0) || !(a.depth_max >= 0.0))
      usage("--depth-step must be positive and --depth-max non-negative");
    const auto n = static_cast<std::size_t>(std::floor(a.depth_max / a.depth_step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i)
      depths.push_back(std::round(static_cast<double>(i) * a.depth_step * 1e9) / 1e9);
  }
  ConfigPtr cfg = open_config(a.config);
  if (a.rays > 0)
    set_rays(cfg.get(), a.rays);
  ensure_dir(a.out);
  if (!a.dump_paths.empty())
    open_out(a.dump_paths);  // truncate; profiles append

  std::ostringstream summary;
  summary << "# config_hash " << config_hash(cfg.get()) << "\n# seed " << a.seed << "\n# pair E"
          << a.emitter << " R" << a.receiver << "\n"
          << "thickness_mm deadband start_mm end_mm\n";
  for (double t : a.thickness) {
    std::vector<double> signal(depths.size());
    check(et_deadband_profile(cfg.get(), t, depths.data(), depths.size(), a.emitter, a.receiver,
                              a.seed, a.direct_only ? 1 : 0,
                              a.dump_paths.empty() ? nullptr : a.dump_paths.c_str(),
                              signal.data()));
    const fs::path path = fs::path(a.out) / ("thickness-" + fmt(t) + "mm.series");
    std::ofstream os = open_out(path);
    os << "# config_hash " << config_hash(cfg.get()) << "\n# seed " << a.seed << "\n# thickness_mm "
       << fmt(t) << "\n# pair E" << a.emitter << " R" << a.receiver << "\n"
       << "depth_mm signal\n";
    for (std::size_t i = 0; i < depths.size(); ++i)
      os << fmt(depths[i]) << " " << fmt(signal[i]) << "\n";

    int found = 0;
    double s = 0.0, e = 0.0;
    check(et_find_flat_interval(depths.data(), signal.data(), depths.size(), a.flat_length,
                                a.flat_tol, &found, &s, &e));
    summary << fmt(t) << " " << (found ? "yes" : "no") << " " << (found ? fmt(s) : "-") << " "
            << (found ? fmt(e) : "-") << "\n";
  }
  open_out(fs::path(a.out) / "deadband-summary.txt") << summary.str();
  std::cout << summary.str();
  return kOk;
}

int exit_code_for(const CLI::Error& e) { return e.get_exit_code() == 0 ? kOk : kUsage; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edgetouch: edge-lit elastomer touch sensor simulation and learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(et_version()));

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Collect indentation datasets");
  s->add_option("--plan", sim.plan, "Plan file");
  s->add_option("--preset", sim.preset, "Built-in plan (replication)");
  s->add_option("--out", sim.out, "Output directory");
  s->add_option("--config", sim.config, "Sensor config file");
  s->add_option("--seed", sim.seed, "Master seed");
  s->add_option("--ambient", sim.ambient, "Ambient level (ad-hoc runs)");
  s->add_option("--noise", sim.noise, "Reading noise sigma");
  s->add_option("--rays", sim.rays, "Rays per illumination state");
  s->add_option("--pattern", sim.pattern, "Ad-hoc pattern: grid | random");
  s->add_option("--count", sim.count, "Random pattern locations");
  s->add_option("--spacing", sim.spacing, "Grid spacing, mm");
  s->add_option("--margin", sim.margin, "Minimum grid distance from the walls, mm");
  s->add_option("--threads", sim.threads, "Worker threads (0: all cores)");
  s->add_option("--save-plan", sim.save_plan, "Write the effective plan here");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Fit the touch classifier and localizer");
  t->add_option("--data", tr.data, "Training datasets")->required();
  t->add_option("--out", tr.out, "Model file")->required();
  t->add_option("--report", tr.report, "Training report (default <model>.report.json)");
  t->add_option("--lambda", tr.lambda, "Fixed KRR regularization");
  t->add_option("--gamma", tr.gamma, "Fixed Laplacian kernel width");
  t->add_option("--svm-c", tr.svm_c, "SVM cost");
  t->add_option("--grid-min", tr.grid_min, "Smallest grid value");
  t->add_option("--grid-max", tr.grid_max, "Largest grid value");
  t->add_option("--grid-points", tr.grid_points, "Grid points per axis");
  t->add_option("--max-samples", tr.max_samples, "Cap on regression training samples");
  t->add_option("--seed", tr.seed, "Training seed");
  t->add_option("--threads", tr.threads, "Worker threads (0: all cores)");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model on test datasets");
  e->add_option("--model", ev.model, "Model file")->required();
  e->add_option("--data", ev.data, "Test datasets")->required();
  e->add_option("--out", ev.out, "Output directory")->required();
  e->add_option("--arrow-depth", ev.arrow_depth, "Depth of the arrow-field export, mm");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Per-frame touch reports as JSON lines");
  p->add_option("--model", pr.model, "Model file")->required();
  p->add_option("--data", pr.data, "Dataset file");
  p->add_option("--frames", pr.frames, "File of 72-reading frames, one per line")
      ;
  p->add_option("--out", pr.out, "Output file (default stdout)");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep-thickness", "Signal vs depth for an opposed pair");
  w->add_option("--thickness", sw.thickness, "Slab thicknesses, mm")->required();
  w->add_option("--depths", sw.depths, "Explicit depths, mm (ascending)");
  w->add_option("--depth-max", sw.depth_max, "Deepest depth, mm");
  w->add_option("--depth-step", sw.depth_step, "Depth step, mm");
  w->add_option("--emitter", sw.emitter, "Emitter index 1..8");
  w->add_option("--receiver", sw.receiver, "Receiver index 1..8");
  w->add_option("--seed", sw.seed, "Seed");
  w->add_option("--config", sw.config, "Sensor config file");
  w->add_option("--rays", sw.rays, "Rays per state");
  w->add_option("--out", sw.out, "Output directory")->required();
  w->add_option("--dump-paths", sw.dump_paths, "Write per-ray path records here");
  w->add_flag("--direct-only", sw.direct_only, "Absorb at the top surface");
  w->add_option("--flat-length", sw.flat_length, "Deadband window length, mm");
  w->add_option("--flat-tolerance", sw.flat_tol, "Deadband tolerance, fraction of range");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kOk : exit_code_for(err);
  }

  try {
    if (s->parsed())
      return cmd_simulate(sim);
    if (t->parsed())
      return cmd_train(tr);
    if (e->parsed())
      return cmd_eval(ev);
    if (p->parsed())
      return cmd_predict(pr);
    if (w->parsed())
      return cmd_sweep(sw);
  } catch (const Failure& f) {
    std::fprintf(stderr, "edgetouch: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "edgetouch: %s\n", ex.what());
    return kData;
  }
  return kUsage;
}
