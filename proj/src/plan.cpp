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

#include "edgetouch/plan.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "edgetouch/config_io.hpp"
#include "edgetouch/error.hpp"
#include "edgetouch/random.hpp"

namespace edgetouch {
namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream ss(s);
  std::vector<std::string> out;
  for (std::string w; ss >> w;)
    out.push_back(w);
  return out;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw_data(what + ": expected an unsigned integer, got '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1" || s == "yes" || s == "on")
    return true;
  if (s == "false" || s == "0" || s == "no" || s == "off")
    return false;
  throw_data(what + ": expected true or false, got '" + s + "'");
}

std::string level_tag(double v) {
  std::string s = format_double(v);
  for (char& c : s)
    if (c == '.')
      c = 'p';
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw_data("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out)
    throw_data("write failed: " + path.string());
}

}  // namespace

ExperimentPlan replication_plan(const std::filesystem::path& output_dir, std::uint64_t seed) {
  ExperimentPlan plan;
  plan.output_dir = output_dir;
  PatternSpec grid;
  grid.kind = "grid";
  grid.role = "train";
  grid.ambient_levels = {0.05, 0.0};
  grid.seeds = {seed, seed + 1};
  PatternSpec random;
  random.kind = "random";
  random.role = "test";
  random.count = 100;
  random.ambient_levels = {0.05, 0.0};
  random.seeds = {seed + 2};
  plan.patterns = {grid, random};
  // Read noise of one step of a 10-bit converter spanning 0.25 of the
  // emitted power.
  plan.noise_sigma = 0.25 / 1024.0;
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  const KeyValues kv = read_key_values(path);
  const std::string origin = path.string();
  const auto schema = kv.find("schema");
  if (schema == kv.end() || schema->second != kPlanSchema)
    throw_data(origin + ": missing or unsupported schema (expected " + kPlanSchema + ")");
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };

  ExperimentPlan plan;
  plan.patterns.clear();
  std::map<int, PatternSpec> patterns;
  for (const auto& [key, value] : kv) {
    const std::string what = origin + ": " + key;
    if (key == "schema")
      continue;
    if (key == "config") {
      plan.config_path = resolve(value);
    } else if (key == "output_dir") {
      plan.output_dir = resolve(value);
    } else if (key == "rays_per_state") {
      plan.rays_per_state = parse_u64(value, what);
      if (*plan.rays_per_state == 0)
        throw_data(what + ": must be positive");
    } else if (key == "noise_sigma") {
      plan.noise_sigma = parse_double(value, what);
    } else if (key == "schedule.hover_start_mm") {
      plan.schedule.hover_start = parse_double(value, what);
    } else if (key == "schedule.hover_end_mm") {
      plan.schedule.hover_end = parse_double(value, what);
    } else if (key == "schedule.hover_step_mm") {
      plan.schedule.hover_step = parse_double(value, what);
    } else if (key == "schedule.contact_start_mm") {
      plan.schedule.contact_start = parse_double(value, what);
    } else if (key == "schedule.contact_end_mm") {
      plan.schedule.contact_end = parse_double(value, what);
    } else if (key == "schedule.contact_step_mm") {
      plan.schedule.contact_step = parse_double(value, what);
    } else if (key == "schedule.mirrored") {
      plan.schedule.mirrored = parse_bool(value, what);
    } else if (key == "schedule.hover") {
      plan.schedule.hover = parse_bool(value, what);
    } else if (key == "schedule.depth_jitter_mm") {
      plan.schedule.depth_jitter = parse_double(value, what);
    } else if (key.rfind("pattern.", 0) == 0) {
      const auto dot = key.find('.', 8);
      if (dot == std::string::npos)
        throw_data(what + ": expected pattern.<n>.<field>");
      const int idx = static_cast<int>(parse_u64(key.substr(8, dot - 8), what));
      const std::string field = key.substr(dot + 1);
      PatternSpec& p = patterns[idx];
      if (field == "kind") {
        if (value != "grid" && value != "random")
          throw_data(what + ": kind must be grid or random");
        p.kind = value;
      } else if (field == "role") {
        if (value != "train" && value != "test")
          throw_data(what + ": role must be train or test");
        p.role = value;
      } else if (field == "spacing_mm") {
        p.spacing = parse_double(value, what);
      } else if (field == "margin_mm") {
        p.margin = parse_double(value, what);
      } else if (field == "count") {
        p.count = parse_u64(value, what);
      } else if (field == "ambient_levels") {
        p.ambient_levels.clear();
        for (const auto& w : split_words(value))
          p.ambient_levels.push_back(parse_double(w, what));
      } else if (field == "seeds") {
        p.seeds.clear();
        for (const auto& w : split_words(value))
          p.seeds.push_back(parse_u64(w, what));
      } else {
        throw_data(what + ": unknown pattern field");
      }
    } else {
      throw_data(what + ": unknown plan key");
    }
  }
  for (auto& [idx, p] : patterns) {
    if (p.ambient_levels.empty() || p.seeds.empty())
      throw_data(origin + ": pattern " + std::to_string(idx) + " needs ambient levels and seeds");
    plan.patterns.push_back(p);
  }
  if (plan.patterns.empty())
    throw_data(origin + ": plan defines no patterns");
  if (!plan.config_path.empty() && !std::filesystem::exists(plan.config_path))
    throw_data(origin + ": config file does not exist: " + plan.config_path.string());
  validate(plan.schedule);
  return plan;
}

std::string format_plan(const ExperimentPlan& plan) {
  std::ostringstream out;
  const SweepSchedule& s = plan.schedule;
  out << "schema = " << kPlanSchema << "\n";
  if (!plan.config_path.empty())
    out << "config = " << plan.config_path.string() << "\n";
  out << "output_dir = " << plan.output_dir.string() << "\n";
  if (plan.rays_per_state)
    out << "rays_per_state = " << *plan.rays_per_state << "\n";
  if (plan.noise_sigma)
    out << "noise_sigma = " << format_double(*plan.noise_sigma) << "\n";
  out << "schedule.hover = " << (s.hover ? "true" : "false") << "\n"
      << "schedule.hover_start_mm = " << format_double(s.hover_start) << "\n"
      << "schedule.hover_end_mm = " << format_double(s.hover_end) << "\n"
      << "schedule.hover_step_mm = " << format_double(s.hover_step) << "\n"
      << "schedule.contact_start_mm = " << format_double(s.contact_start) << "\n"
      << "schedule.contact_end_mm = " << format_double(s.contact_end) << "\n"
      << "schedule.contact_step_mm = " << format_double(s.contact_step) << "\n"
      << "schedule.mirrored = " << (s.mirrored ? "true" : "false") << "\n"
      << "schedule.depth_jitter_mm = " << format_double(s.depth_jitter) << "\n";
  for (std::size_t i = 0; i < plan.patterns.size(); ++i) {
    const PatternSpec& p = plan.patterns[i];
    const std::string k = "pattern." + std::to_string(i + 1) + ".";
    out << k << "kind = " << p.kind << "\n" << k << "role = " << p.role << "\n";
    if (p.kind == "grid")
      out << k << "spacing_mm = " << format_double(p.spacing) << "\n"
          << k << "margin_mm = " << format_double(p.margin) << "\n";
    else
      out << k << "count = " << p.count << "\n";
    out << k << "ambient_levels =";
    for (double a : p.ambient_levels)
      out << " " << format_double(a);
    out << "\n" << k << "seeds =";
    for (auto sd : p.seeds)
      out << " " << sd;
    out << "\n";
  }
  return out.str();
}

std::vector<PlannedDataset> expand_plan(const ExperimentPlan& plan) {
  std::vector<PlannedDataset> out;
  for (std::size_t pi = 0; pi < plan.patterns.size(); ++pi) {
    const PatternSpec& p = plan.patterns[pi];
    for (std::size_t ai = 0; ai < p.ambient_levels.size(); ++ai) {
      for (std::uint64_t seed : p.seeds) {
        PlannedDataset d;
        d.role = p.role;
        d.kind = p.kind;
        d.ambient_level = p.ambient_levels[ai];
        d.plan_seed = seed;
        // Each combination is its own acquisition run.
        d.collect_seed = derive_seed(seed, "acquisition", pi * 1000 + ai);
        d.path = plan.output_dir / (p.role + "-" + p.kind + "-ambient" + level_tag(d.ambient_level) +
                                    "-seed" + std::to_string(seed) + ".dataset");
        d.spec = &p;
        out.push_back(d);
      }
    }
  }
  return out;
}

SensorConfig plan_config(const ExperimentPlan& plan) {
  SensorConfig config =
      plan.config_path.empty() ? SensorConfig::default_config() : load_config(plan.config_path);
  if (plan.rays_per_state)
    for (auto& e : config.emitters)
      e.rays_per_state = *plan.rays_per_state;
  if (plan.noise_sigma)
    config.noise_sigma = *plan.noise_sigma;
  validate(config);
  return config;
}

std::vector<PlannedDataset> run_simulation(const ExperimentPlan& plan, unsigned threads,
                                           const Progress& progress) {
  const SensorConfig base = plan_config(plan);
  std::error_code ec;
  std::filesystem::create_directories(plan.output_dir, ec);
  if (ec)
    throw_data("cannot create output directory " + plan.output_dir.string() + ": " + ec.message());
  auto planned = expand_plan(plan);
  for (const PlannedDataset& d : planned) {
    SensorConfig config = base;
    config.ambient_level = d.ambient_level;
    std::vector<Location> pattern =
        d.kind == "grid"
            ? grid_pattern(config.cavity_side, config.active_area_side, d.spec->spacing,
                           d.spec->margin, d.collect_seed)
            : random_pattern(d.spec->count, config.cavity_side, config.active_area_side,
                             d.collect_seed);
    const Dataset ds = collect(config, pattern, d.kind, plan.schedule, d.collect_seed, threads);
    save_dataset(ds, d.path);
    if (progress)
      progress(d.path.string());
  }
  return planned;
}

EvaluationResult evaluate(const TwoStageModel& model, const Dataset& dataset, double arrow_depth) {
  const Predictions p = predict_dataset(model, dataset);
  EvaluationResult r;
  r.regression_slices = default_regression_slices();
  r.classification = classification_table(dataset, p, default_classification_slices());
  r.regression = regression_table(dataset, p, r.regression_slices);
  r.arrows = arrow_field_export(dataset, p, arrow_depth);
  return r;
}

EvaluationFiles write_evaluation(const EvaluationResult& r, const Dataset& dataset,
                                 const std::filesystem::path& dir, const std::string& stem) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw_data("cannot create output directory " + dir.string() + ": " + ec.message());
  const auto& m = dataset.metadata;
  const std::string tag = "# config_hash = " + m.config_hash + "\n# seed = " +
                          std::to_string(m.seed) + "\n# ambient_level = " +
                          format_double(m.ambient_level) + "\n";
  EvaluationFiles f;
  f.classification = dir / (stem + ".classification.txt");
  f.regression = dir / (stem + ".regression.txt");
  f.csv = dir / (stem + ".csv");
  f.arrows = dir / (stem + ".arrows.txt");
  write_text(f.classification,
             tag + render_classification_table(r.classification,
                                               "Touch vs. no touch classification success rate"));
  write_text(f.regression, tag + render_regression_table(r.regression, r.regression_slices,
                                                         "Localization and depth accuracy (mm)"));
  write_text(f.csv, tag + render_csv(r.classification, r.regression, r.regression_slices));
  write_text(f.arrows, tag + render_arrows(r.arrows));
  return f;
}

}  // namespace edgetouch
