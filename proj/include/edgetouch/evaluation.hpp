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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgetouch/learning.hpp"
#include "edgetouch/protocols.hpp"

namespace edgetouch {

inline constexpr double kSliceTolerance = 0.01;  // mm

std::vector<double> default_classification_slices();  // -0.4 .. 1.0 step 0.1
std::vector<double> default_regression_slices();      // 0.1 0.5 1 2 3 5

struct Summary {
  double median = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Throws on an empty input.
Summary summarize(std::span<const double> values);

/// Model outputs for every sample of a dataset, computed once.
struct Predictions {
  std::vector<bool> touch;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> d;
};

/// Runs both stages on every sample; the regressor output is kept for all
/// samples so that regression tables do not depend on the gate.
Predictions predict_dataset(const TwoStageModel& model, const Dataset& dataset);

struct ClassificationRow {
  double depth = 0.0;
  std::size_t count = 0;
  std::optional<double> rate;  // absent when the slice is empty
};

std::vector<ClassificationRow> classification_table(const Dataset& dataset,
                                                    const Predictions& predictions,
                                                    std::span<const double> slices,
                                                    double tolerance = kSliceTolerance);

struct DepthSliceMetrics {
  double depth = 0.0;
  std::size_t count = 0;
  Summary localization;
  Summary depth_error;
  std::optional<double> class_rate;
};

/// One entry per slice; std::nullopt for empty slices.
std::vector<std::optional<DepthSliceMetrics>> regression_table(const Dataset& dataset,
                                                               const Predictions& predictions,
                                                               std::span<const double> slices,
                                                               double tolerance = kSliceTolerance);

struct ArrowRecord {
  double x_true = 0.0;
  double y_true = 0.0;
  double x_pred = 0.0;
  double y_pred = 0.0;
  double depth = 0.0;
};

/// One arrow per indentation (first sample of each location at the slice
/// depth) that the classifier marks as touch.
std::vector<ArrowRecord> arrow_field_export(const Dataset& dataset, const Predictions& predictions,
                                            double depth, double tolerance = kSliceTolerance);

std::string render_classification_table(const std::vector<ClassificationRow>& rows,
                                        const std::string& title);
std::string render_regression_table(const std::vector<std::optional<DepthSliceMetrics>>& rows,
                                    std::span<const double> slices, const std::string& title);

/// depth_mm,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std,class_rate
/// over the union of both slice sets; empty cells where a value is absent.
std::string render_csv(const std::vector<ClassificationRow>& classification,
                       const std::vector<std::optional<DepthSliceMetrics>>& regression,
                       std::span<const double> regression_slices);

std::string render_arrows(const std::vector<ArrowRecord>& arrows);

}  // namespace edgetouch
