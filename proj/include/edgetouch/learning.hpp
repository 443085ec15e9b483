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

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edgetouch/protocols.hpp"
#include "edgetouch/sensor.hpp"

namespace edgetouch {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// exp(-gamma * sum |u_i - v_i|).
double laplacian_kernel(std::span<const double> u, std::span<const double> v, double gamma);

/// Pairwise L1 distances between the rows of a and b.
Matrix l1_distances(const Matrix& a, const Matrix& b);

/// Per-feature standardization. Constant features keep scale 1.
struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
};

struct KrrModel {
  Matrix train;  // n x p, already standardized
  Matrix alpha;  // n x outputs
  double lambda = 0.0;
  double gamma = 0.0;
};

/// Solves (K + lambda I) alpha = Y with a Cholesky factorization and
/// iterative refinement, then checks the relative residual against 1e-8.
KrrModel krr_fit(const Matrix& x, const Matrix& y, double lambda, double gamma);

/// ||(K + lambda I) alpha - Y|| / ||Y|| (0 when Y is zero and alpha is too).
double krr_relative_residual(const KrrModel& model, const Matrix& y);

Matrix krr_predict(const KrrModel& model, const Matrix& x);
Vector krr_predict(const KrrModel& model, std::span<const double> x);

struct LinearSvmModel {
  Vector weights;
  double bias = 0.0;
  double c = 1.0;
  double duality_gap = 0.0;
  std::size_t epochs = 0;
};

struct SvmOptions {
  double c = 1.0;
  double tolerance = 1e-6;  // on the duality gap, relative to max(1, primal)
  std::size_t max_epochs = 50000;
  std::uint64_t seed = 0;
};

/// L1-loss soft-margin linear SVM, min 0.5 (|w|^2 + b^2) + C sum hinge,
/// trained by dual coordinate descent. The bias is handled as an extra
/// constant feature and is therefore regularized too. Labels are +1 / -1.
LinearSvmModel svm_train(const Matrix& x, std::span<const int> labels, const SvmOptions& options);

double svm_decision(const LinearSvmModel& model, std::span<const double> x);
double svm_primal_objective(const LinearSvmModel& model, const Matrix& x,
                            std::span<const int> labels);

struct GridSearchResult {
  double lambda = 0.0;
  double gamma = 0.0;
  std::vector<double> lambdas;  // ascending
  std::vector<double> gammas;   // ascending
  Matrix scores;                // gamma x lambda, mean Euclidean error (inf if a fit failed)
  std::uint64_t split_seed = 0;
  std::vector<Eigen::Index> fit_rows;         // first half of the split
  std::vector<Eigen::Index> validation_rows;  // second half
};

/// Splits the rows in half with a seeded permutation, fits on the first half
/// and scores mean Euclidean error of the outputs on the second. Ties go to
/// the smaller gamma, then the smaller lambda.
GridSearchResult grid_search(const Matrix& x, const Matrix& y, std::span<const double> lambdas,
                             std::span<const double> gammas, std::uint64_t seed,
                             unsigned threads = 0);

/// `count` log-spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

struct TrainOptions {
  SvmOptions svm;
  std::optional<double> lambda;  // both set: grid search is skipped
  std::optional<double> gamma;
  std::vector<double> lambda_grid = log_grid(1e-6, 1e-1, 11);
  std::vector<double> gamma_grid = log_grid(1e-6, 1e-1, 11);
  std::size_t max_regression_samples = 8000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

struct TrainingReport {
  double lambda = 0.0;
  double gamma = 0.0;
  bool grid_searched = false;
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  std::vector<double> lambda_grid;
  std::vector<double> gamma_grid;
  std::vector<double> grid_scores;  // gamma-major
  std::size_t classifier_samples = 0;
  std::size_t regression_pool = 0;
  std::size_t regression_samples = 0;
  double svm_c = 0.0;
  double svm_duality_gap = 0.0;
  std::size_t svm_epochs = 0;
  double krr_residual = 0.0;
  std::vector<std::uint64_t> dataset_seeds;

  bool operator==(const TrainingReport&) const = default;
};

struct TwoStageModel {
  std::string config_hash;
  Standardizer scaler;
  LinearSvmModel classifier;
  KrrModel regressor;  // outputs x, y, d, centred
  Vector target_offset = Vector::Zero(3);  // added back to regressor outputs
  TrainingReport report;
};

/// Regressor outputs (x, y, d) for standardized feature rows, ungated.
Matrix localize(const TwoStageModel& model, const Matrix& x);

/// Classifier on every sample (touch = d >= 0), regressor on the contact
/// samples only: exact duplicates removed, then a seeded subset of at most
/// max_regression_samples rows.
TwoStageModel train_two_stage(std::span<const Dataset> datasets, const TrainOptions& options);

struct TouchReport {
  bool touch = false;
  double score = 0.0;  // classifier decision value
  double x = 0.0;
  double y = 0.0;
  double d = 0.0;
};

TouchReport predict(const TwoStageModel& model, const SignalFrame& frame);

/// Feature rows (standardized) for a list of frames.
Matrix standardized_features(const TwoStageModel& model, std::span<const SignalFrame> frames);

void save_model(const TwoStageModel& model, const std::filesystem::path& path);
TwoStageModel load_model(const std::filesystem::path& path);
std::string model_to_json(const TwoStageModel& model);
TwoStageModel model_from_json(const std::string& text, const std::string& origin);
std::string report_to_json(const TrainingReport& report);

}  // namespace edgetouch
