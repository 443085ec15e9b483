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

#include "edgetouch/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "edgetouch/config_io.hpp"
#include "edgetouch/error.hpp"
#include "edgetouch/summation.hpp"

namespace edgetouch {
namespace {

bool in_slice(double d, double slice, double tol) { return std::abs(d - slice) <= tol + 1e-12; }

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::vector<double> default_classification_slices() {
  std::vector<double> s;
  for (int i = -4; i <= 10; ++i)
    s.push_back(i / 10.0);
  return s;
}

std::vector<double> default_regression_slices() { return {0.1, 0.5, 1.0, 2.0, 3.0, 5.0}; }

Summary summarize(std::span<const double> values) {
  if (values.empty())
    throw_invalid("cannot summarize an empty slice");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  Summary s;
  s.median = n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  NeumaierSum sum;
  for (double x : v)
    sum.add(x);
  s.mean = sum.value() / static_cast<double>(n);
  NeumaierSum sq;
  for (double x : v)
    sq.add((x - s.mean) * (x - s.mean));
  s.std = std::sqrt(sq.value() / static_cast<double>(n));
  return s;
}

Predictions predict_dataset(const TwoStageModel& model, const Dataset& dataset) {
  if (dataset.metadata.config_hash != model.config_hash)
    throw_data("dataset config hash " + dataset.metadata.config_hash +
               " does not match the model's " + model.config_hash);
  std::vector<SignalFrame> frames;
  frames.reserve(dataset.samples.size());
  for (const Sample& s : dataset.samples)
    frames.push_back(s.frame());
  Predictions p;
  const std::size_t n = frames.size();
  p.touch.resize(n);
  p.x.resize(n);
  p.y.resize(n);
  p.d.resize(n);
  // Blocks keep the test-by-train kernel matrix small.
  constexpr std::size_t kBlock = 1024;
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t len = std::min(kBlock, n - start);
    const Matrix x =
        standardized_features(model, std::span<const SignalFrame>(frames.data() + start, len));
    const Matrix out = localize(model, x);
    for (std::size_t i = 0; i < len; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double score =
          svm_decision(model.classifier, std::span<const double>(x.row(r).data(), kFeatures));
      p.touch[start + i] = score > 0.0;
      p.x[start + i] = out(r, 0);
      p.y[start + i] = out(r, 1);
      p.d[start + i] = out(r, 2);
    }
  }
  return p;
}

std::vector<ClassificationRow> classification_table(const Dataset& dataset,
                                                    const Predictions& predictions,
                                                    std::span<const double> slices,
                                                    double tolerance) {
  std::vector<ClassificationRow> rows;
  for (double slice : slices) {
    ClassificationRow row;
    row.depth = slice;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
      const double d = dataset.samples[i].d;
      if (!in_slice(d, slice, tolerance))
        continue;
      ++row.count;
      if (predictions.touch[i] == (d >= 0.0))
        ++correct;
    }
    if (row.count > 0)
      row.rate = static_cast<double>(correct) / static_cast<double>(row.count);
    rows.push_back(row);
  }
  return rows;
}

std::vector<std::optional<DepthSliceMetrics>> regression_table(const Dataset& dataset,
                                                               const Predictions& predictions,
                                                               std::span<const double> slices,
                                                               double tolerance) {
  const auto class_rows = classification_table(dataset, predictions, slices, tolerance);
  std::vector<std::optional<DepthSliceMetrics>> rows;
  for (std::size_t k = 0; k < slices.size(); ++k) {
    std::vector<double> loc;
    std::vector<double> dep;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
      const Sample& s = dataset.samples[i];
      if (!in_slice(s.d, slices[k], tolerance))
        continue;
      loc.push_back(std::hypot(predictions.x[i] - s.x, predictions.y[i] - s.y));
      dep.push_back(std::abs(predictions.d[i] - s.d));
    }
    if (loc.empty()) {
      rows.emplace_back(std::nullopt);
      continue;
    }
    DepthSliceMetrics m;
    m.depth = slices[k];
    m.count = loc.size();
    m.localization = summarize(loc);
    m.depth_error = summarize(dep);
    m.class_rate = class_rows[k].rate;
    rows.emplace_back(m);
  }
  return rows;
}

std::vector<ArrowRecord> arrow_field_export(const Dataset& dataset, const Predictions& predictions,
                                            double depth, double tolerance) {
  std::vector<ArrowRecord> out;
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const Sample& s = dataset.samples[i];
    if (!in_slice(s.d, depth, tolerance))
      continue;
    if (!seen.insert({s.x, s.y}).second)
      continue;
    if (!predictions.touch[i])
      continue;
    out.push_back({s.x, s.y, predictions.x[i], predictions.y[i], s.d});
  }
  return out;
}

std::string render_classification_table(const std::vector<ClassificationRow>& rows,
                                        const std::string& title) {
  std::ostringstream out;
  out << title << "\n";
  out << pad_left("depth_mm", 10) << pad_left("samples", 10) << pad_left("success", 10) << "\n";
  for (const auto& r : rows) {
    out << pad_left(fixed(r.depth, 1), 10) << pad_left(std::to_string(r.count), 10)
        << pad_left(r.rate ? fixed(*r.rate, 3) : "absent", 10) << "\n";
  }
  return out.str();
}

std::string render_regression_table(const std::vector<std::optional<DepthSliceMetrics>>& rows,
                                    std::span<const double> slices, const std::string& title) {
  std::ostringstream out;
  out << title << "\n";
  out << pad_left("depth_mm", 10) << pad_left("samples", 9) << pad_left("loc_med", 10)
      << pad_left("loc_mean", 10) << pad_left("loc_std", 10) << pad_left("dep_med", 10)
      << pad_left("dep_mean", 10) << pad_left("dep_std", 10) << "\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out << pad_left(fixed(slices[k], 1), 10);
    if (!rows[k]) {
      out << pad_left("absent", 9) << "\n";
      continue;
    }
    const auto& m = *rows[k];
    out << pad_left(std::to_string(m.count), 9) << pad_left(fixed(m.localization.median, 3), 10)
        << pad_left(fixed(m.localization.mean, 3), 10) << pad_left(fixed(m.localization.std, 3), 10)
        << pad_left(fixed(m.depth_error.median, 3), 10)
        << pad_left(fixed(m.depth_error.mean, 3), 10) << pad_left(fixed(m.depth_error.std, 3), 10)
        << "\n";
  }
  return out.str();
}

std::string render_csv(const std::vector<ClassificationRow>& classification,
                       const std::vector<std::optional<DepthSliceMetrics>>& regression,
                       std::span<const double> regression_slices) {
  // Keyed on the depth rounded to micrometres so 1.0 from both sets merges.
  struct Row {
    double depth;
    std::optional<DepthSliceMetrics> metrics;
    std::optional<double> rate;
  };
  std::map<long long, Row> rows;
  auto key = [](double d) { return std::llround(d * 1e6); };
  for (const auto& c : classification) {
    Row& r = rows.try_emplace(key(c.depth), Row{c.depth, std::nullopt, std::nullopt}).first->second;
    r.rate = c.rate;
  }
  for (std::size_t k = 0; k < regression.size(); ++k) {
    const double d = regression_slices[k];
    Row& r = rows.try_emplace(key(d), Row{d, std::nullopt, std::nullopt}).first->second;
    r.metrics = regression[k];
    if (regression[k] && !r.rate)
      r.rate = regression[k]->class_rate;
  }
  std::ostringstream out;
  out << "depth_mm,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std,class_rate\n";
  for (const auto& [k, r] : rows) {
    out << format_double(r.depth);
    if (r.metrics) {
      const auto& m = *r.metrics;
      for (double v : {m.localization.median, m.localization.mean, m.localization.std,
                       m.depth_error.median, m.depth_error.mean, m.depth_error.std})
        out << "," << format_double(v);
    } else {
      out << ",,,,,,";
    }
    out << "," << (r.rate ? format_double(*r.rate) : "") << "\n";
  }
  return out.str();
}

std::string render_arrows(const std::vector<ArrowRecord>& arrows) {
  std::ostringstream out;
  out << "# x_true y_true x_pred y_pred depth\n";
  for (const auto& a : arrows)
    out << format_double(a.x_true) << " " << format_double(a.y_true) << " "
        << format_double(a.x_pred) << " " << format_double(a.y_pred) << " "
        << format_double(a.depth) << "\n";
  return out.str();
}

}  // namespace edgetouch
