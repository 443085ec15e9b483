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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "edgetouch/evaluation.hpp"
#include "edgetouch/learning.hpp"
#include "edgetouch/protocols.hpp"
#include "edgetouch/sensor.hpp"

namespace edgetouch {

inline constexpr const char* kPlanSchema = "edgetouch-plan-v1";

/// One pattern family of a plan. Expands to one dataset per
/// (ambient level, seed) pair.
struct PatternSpec {
  std::string kind = "grid";  // grid | random
  std::string role = "train";  // train | test
  double spacing = 2.0;        // grid only, mm
  double margin = 3.0;         // grid only, mm
  std::size_t count = 100;     // random only
  std::vector<double> ambient_levels{0.0};
  std::vector<std::uint64_t> seeds{1};
};

struct ExperimentPlan {
  std::filesystem::path config_path;  // empty: built-in default sensor
  std::filesystem::path output_dir = "out";
  SweepSchedule schedule;
  std::vector<PatternSpec> patterns;
  std::optional<std::size_t> rays_per_state;
  std::optional<double> noise_sigma;
};

/// Four grid training sets (two lit, two dark) and two random 100-location
/// test sets (one lit, one dark), read with 10-bit converter noise.
ExperimentPlan replication_plan(const std::filesystem::path& output_dir, std::uint64_t seed = 2017);

/// Relative paths inside the file resolve against the file's directory.
ExperimentPlan load_plan(const std::filesystem::path& path);
std::string format_plan(const ExperimentPlan& plan);

struct PlannedDataset {
  std::string role;
  std::string kind;
  double ambient_level = 0.0;
  std::uint64_t plan_seed = 0;
  std::uint64_t collect_seed = 0;  // distinct per (pattern, ambient, seed)
  std::filesystem::path path;
  const PatternSpec* spec = nullptr;
};

std::vector<PlannedDataset> expand_plan(const ExperimentPlan& plan);

/// Sensor config with the plan's overrides applied.
SensorConfig plan_config(const ExperimentPlan& plan);

using Progress = std::function<void(const std::string&)>;

/// Collects and writes every dataset of the plan.
std::vector<PlannedDataset> run_simulation(const ExperimentPlan& plan, unsigned threads = 0,
                                           const Progress& progress = {});

struct EvaluationFiles {
  std::filesystem::path classification;
  std::filesystem::path regression;
  std::filesystem::path csv;
  std::filesystem::path arrows;
};

struct EvaluationResult {
  std::vector<ClassificationRow> classification;
  std::vector<std::optional<DepthSliceMetrics>> regression;
  std::vector<double> regression_slices;
  std::vector<ArrowRecord> arrows;
};

EvaluationResult evaluate(const TwoStageModel& model, const Dataset& dataset,
                          double arrow_depth = 1.0);

/// Writes <stem>.classification.txt, <stem>.regression.txt, <stem>.csv and
/// <stem>.arrows.txt into `dir`.
EvaluationFiles write_evaluation(const EvaluationResult& result, const Dataset& dataset,
                                 const std::filesystem::path& dir, const std::string& stem);

}  // namespace edgetouch
