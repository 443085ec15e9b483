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

#include "edgetouch/learning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "edgetouch/error.hpp"
#include "edgetouch/parallel.hpp"
#include "edgetouch/random.hpp"
#include "edgetouch/summation.hpp"

namespace edgetouch {
namespace {

using Dense = Eigen::MatrixXd;
using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

Dense kernel_from_distances(const Matrix& dist, double gamma) {
  return (dist.array() * -gamma).exp().matrix();
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    throw_numerical(std::string(what) + " contains non-finite values");
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, Eigen::Index cols_hint = -1) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : std::max<Eigen::Index>(cols_hint, 0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != cols)
      throw_data("ragged matrix in model file");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

// Infinite grid scores are stored as null.
json score_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double score_from_json(const json& j) { return j.is_null() ? kInf : j.get<double>(); }

}  // namespace

double laplacian_kernel(std::span<const double> u, std::span<const double> v, double gamma) {
  if (u.size() != v.size())
    throw_invalid("kernel arguments differ in length");
  if (!(gamma >= 0.0))
    throw_invalid("kernel bandwidth must be non-negative");
  double dist = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    dist += std::abs(u[i] - v[i]);
  return std::exp(-gamma * dist);
}

Matrix l1_distances(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols())
    throw_invalid("feature dimensions differ");
  Matrix d(a.rows(), b.rows());
  const bool same = &a == &b;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    const Eigen::Index j0 = same ? i : 0;
    for (Eigen::Index j = j0; j < b.rows(); ++j) {
      const double v = (ai - b.row(j)).cwiseAbs().sum();
      d(i, j) = v;
      if (same)
        d(j, i) = v;
    }
  }
  return d;
}

Standardizer Standardizer::fit(const Matrix& x) {
  if (x.rows() == 0)
    throw_invalid("cannot standardize an empty feature matrix");
  Standardizer s;
  const auto n = static_cast<double>(x.rows());
  s.mean = x.colwise().sum().transpose() / n;
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
    const double sd = std::sqrt(var);
    s.scale(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& x) const {
  if (x.cols() != mean.size())
    throw_invalid("feature dimension does not match the standardizer");
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out.row(i) = (x.row(i) - mean.transpose()).cwiseQuotient(scale.transpose());
  return out;
}

KrrModel krr_fit(const Matrix& x, const Matrix& y, double lambda, double gamma) {
  if (x.rows() < 1)
    throw_invalid("kernel ridge regression needs at least one sample");
  if (y.rows() != x.rows())
    throw_invalid("feature and target row counts differ");
  if (!(lambda > 0.0))
    throw_invalid("ridge factor lambda must be positive");
  if (!(gamma >= 0.0))
    throw_invalid("kernel bandwidth gamma must be non-negative");
  require_finite(x, "training features");
  require_finite(y, "training targets");

  Dense a = kernel_from_distances(l1_distances(x, x), gamma);
  a.diagonal().array() += lambda;
  const Eigen::LLT<Dense> llt(a);
  if (llt.info() != Eigen::Success)
    throw_numerical("Cholesky factorization of the kernel system failed");
  const Dense rhs = y;
  Dense alpha = llt.solve(rhs);
  const double y_norm = rhs.norm();
  for (int it = 0; it < 4; ++it) {
    const Dense r = rhs - a * alpha;
    if (r.norm() <= 1e-15 * y_norm)
      break;
    alpha += llt.solve(r);
  }
  if (!alpha.allFinite())
    throw_numerical("kernel ridge solve produced non-finite coefficients");

  KrrModel m;
  m.train = x;
  m.alpha = alpha;
  m.lambda = lambda;
  m.gamma = gamma;
  const double res = krr_relative_residual(m, y);
  if (!(res < 1e-8))
    throw_numerical("kernel ridge residual " + std::to_string(res) + " exceeds 1e-8");
  return m;
}

double krr_relative_residual(const KrrModel& model, const Matrix& y) {
  Dense a = kernel_from_distances(l1_distances(model.train, model.train), model.gamma);
  a.diagonal().array() += model.lambda;
  const Dense r = a * Dense(model.alpha) - Dense(y);
  const double y_norm = y.norm();
  return y_norm > 0.0 ? r.norm() / y_norm : r.norm();
}

Matrix krr_predict(const KrrModel& model, const Matrix& x) {
  const Matrix k = kernel_from_distances(l1_distances(x, model.train), model.gamma);
  return k * model.alpha;
}

Vector krr_predict(const KrrModel& model, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != model.train.cols())
    throw_invalid("feature dimension does not match the regressor");
  Matrix row(1, model.train.cols());
  for (Eigen::Index j = 0; j < row.cols(); ++j)
    row(0, j) = x[static_cast<std::size_t>(j)];
  return krr_predict(model, row).row(0).transpose();
}

namespace {

constexpr std::size_t kPolishInterval = 20;
constexpr std::size_t kPolishMaxFree = 3000;

// Solves the dual restricted to the free variables (the bound ones held
// fixed) and moves towards that point as far as the box allows.
void polish_free_set(const Matrix& x, std::span<const int> labels, double c,
                     std::vector<double>& alpha, Vector& w, double& b) {
  std::vector<Eigen::Index> free;
  for (std::size_t i = 0; i < alpha.size(); ++i)
    if (alpha[i] > 0.0 && alpha[i] < c)
      free.push_back(static_cast<Eigen::Index>(i));
  if (free.empty() || free.size() > kPolishMaxFree)
    return;
  const auto nf = static_cast<Eigen::Index>(free.size());
  const Eigen::Index p = x.cols();
  Matrix z(nf, p + 1);
  Vector cur(nf);
  for (Eigen::Index k = 0; k < nf; ++k) {
    const Eigen::Index i = free[static_cast<std::size_t>(k)];
    const double yi = labels[static_cast<std::size_t>(i)];
    z.row(k).head(p) = yi * x.row(i);
    z(k, p) = yi;
    cur(k) = alpha[static_cast<std::size_t>(i)];
  }
  Vector v(p + 1);
  v.head(p) = w;
  v(p) = b;
  const Vector v_bound = v - z.transpose() * cur;
  const Matrix q = z * z.transpose();
  const Vector rhs = Vector::Ones(nf) - z * v_bound;
  const Vector target = q.completeOrthogonalDecomposition().solve(rhs);
  if (!target.allFinite())
    return;
  const Vector dir = target - cur;
  const Vector dv = z.transpose() * dir;
  const double curv = dv.squaredNorm();
  if (!(curv > 0.0))
    return;
  double t = (dir.sum() - v.dot(dv)) / curv;
  for (Eigen::Index k = 0; k < nf; ++k) {
    if (dir(k) > 0.0)
      t = std::min(t, (c - cur(k)) / dir(k));
    else if (dir(k) < 0.0)
      t = std::min(t, cur(k) / -dir(k));
  }
  if (!(t > 0.0))
    return;
  for (Eigen::Index k = 0; k < nf; ++k)
    alpha[static_cast<std::size_t>(free[static_cast<std::size_t>(k)])] =
        std::clamp(cur(k) + t * dir(k), 0.0, c);
  v = v_bound;
  for (Eigen::Index k = 0; k < nf; ++k)
    v += alpha[static_cast<std::size_t>(free[static_cast<std::size_t>(k)])] * z.row(k).transpose();
  w = v.head(p);
  b = v(p);
}

}  // namespace

LinearSvmModel svm_train(const Matrix& x, std::span<const int> labels, const SvmOptions& options) {
  const Eigen::Index n = x.rows();
  if (static_cast<std::size_t>(n) != labels.size())
    throw_invalid("feature and label counts differ");
  if (!(options.c > 0.0))
    throw_invalid("SVM constant C must be positive");
  bool pos = false;
  bool neg = false;
  for (int l : labels) {
    if (l != 1 && l != -1)
      throw_invalid("SVM labels must be +1 or -1");
    (l > 0 ? pos : neg) = true;
  }
  if (!pos || !neg)
    throw_invalid("SVM training needs both classes");
  require_finite(x, "classifier features");

  const double c = options.c;
  Vector w = Vector::Zero(x.cols());
  double b = 0.0;
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> q(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    q[static_cast<std::size_t>(i)] = x.row(i).squaredNorm() + 1.0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(derive_seed(options.seed, "svm"));

  auto gap_of = [&](const std::vector<double>& a, const Vector& ww, double bb, double& primal) {
    NeumaierSum hinge;
    NeumaierSum alpha_sum;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      hinge.add(std::max(0.0, 1.0 - labels[iu] * (x.row(i).dot(ww) + bb)));
      alpha_sum.add(a[iu]);
    }
    const double reg = 0.5 * (ww.squaredNorm() + bb * bb);
    primal = reg + c * hinge.value();
    return primal - (alpha_sum.value() - reg);
  };

  LinearSvmModel m;
  m.c = c;
  bool converged = false;
  for (std::size_t epoch = 1; epoch <= options.max_epochs && !converged; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (Eigen::Index i : order) {
      const auto iu = static_cast<std::size_t>(i);
      const double yi = labels[iu];
      const double g = yi * (x.row(i).dot(w) + b) - 1.0;
      const double a = alpha[iu];
      double pg = g;
      if (a <= 0.0)
        pg = std::min(g, 0.0);
      else if (a >= c)
        pg = std::max(g, 0.0);
      if (pg == 0.0)
        continue;
      const double na = std::clamp(a - g / q[iu], 0.0, c);
      const double delta = (na - a) * yi;
      w += delta * x.row(i).transpose();
      b += delta;
      alpha[iu] = na;
    }

    double primal = 0.0;
    m.duality_gap = gap_of(alpha, w, b, primal);
    m.epochs = epoch;
    converged = m.duality_gap <= options.tolerance * std::max(1.0, primal);
    if (!converged && epoch % kPolishInterval == 0) {
      std::vector<double> a2 = alpha;
      Vector w2 = w;
      double b2 = b;
      polish_free_set(x, labels, c, a2, w2, b2);
      double p2 = 0.0;
      const double g2 = gap_of(a2, w2, b2, p2);
      if (g2 < m.duality_gap) {
        alpha.swap(a2);
        w = w2;
        b = b2;
        m.duality_gap = g2;
        converged = g2 <= options.tolerance * std::max(1.0, p2);
      }
    }
  }
  if (!converged)
    throw_numerical("SVM did not reach the duality-gap tolerance within " +
                    std::to_string(options.max_epochs) + " epochs");
  m.weights = w;
  m.bias = b;
  return m;
}

double svm_decision(const LinearSvmModel& model, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != model.weights.size())
    throw_invalid("feature dimension does not match the classifier");
  double s = model.bias;
  for (std::size_t j = 0; j < x.size(); ++j)
    s += model.weights(static_cast<Eigen::Index>(j)) * x[j];
  return s;
}

double svm_primal_objective(const LinearSvmModel& model, const Matrix& x,
                            std::span<const int> labels) {
  NeumaierSum hinge;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    hinge.add(std::max(0.0, 1.0 - labels[static_cast<std::size_t>(i)] *
                                      (x.row(i).dot(model.weights) + model.bias)));
  return 0.5 * (model.weights.squaredNorm() + model.bias * model.bias) + model.c * hinge.value();
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0)
    throw_invalid("log grid needs 0 < lo <= hi and a positive count");
  std::vector<double> g(count);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    g[i] = std::pow(10.0, a + t * (b - a));
  }
  g.front() = lo;
  g.back() = count == 1 ? lo : hi;
  return g;
}

GridSearchResult grid_search(const Matrix& x, const Matrix& y, std::span<const double> lambdas,
                             std::span<const double> gammas, std::uint64_t seed,
                             unsigned threads) {
  if (lambdas.empty() || gammas.empty())
    throw_invalid("grid search needs non-empty lambda and gamma grids");
  if (x.rows() < 2)
    throw_invalid("grid search needs at least two samples");
  if (y.rows() != x.rows())
    throw_invalid("feature and target row counts differ");

  GridSearchResult r;
  r.lambdas.assign(lambdas.begin(), lambdas.end());
  r.gammas.assign(gammas.begin(), gammas.end());
  std::sort(r.lambdas.begin(), r.lambdas.end());
  std::sort(r.gammas.begin(), r.gammas.end());
  r.split_seed = seed;

  std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Rng rng(derive_seed(seed, "split"));
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  const Eigen::Index half = x.rows() / 2;
  const Eigen::Index rest = x.rows() - half;
  Matrix xf(half, x.cols()), yf(half, y.cols()), xv(rest, x.cols()), yv(rest, y.cols());
  for (Eigen::Index i = 0; i < half; ++i) {
    xf.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    yf.row(i) = y.row(perm[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < rest; ++i) {
    xv.row(i) = x.row(perm[static_cast<std::size_t>(half + i)]);
    yv.row(i) = y.row(perm[static_cast<std::size_t>(half + i)]);
  }
  r.fit_rows.assign(perm.begin(), perm.begin() + half);
  r.validation_rows.assign(perm.begin() + half, perm.end());
  const Matrix dff = l1_distances(xf, xf);
  const Matrix dvf = l1_distances(xv, xf);
  const Dense rhs = yf;

  const auto ng = static_cast<Eigen::Index>(r.gammas.size());
  const auto nl = static_cast<Eigen::Index>(r.lambdas.size());
  r.scores = Matrix::Constant(ng, nl, kInf);
  parallel_for(r.gammas.size(), threads, [&](std::size_t gi) {
    const double gamma = r.gammas[gi];
    const Dense kf = kernel_from_distances(dff, gamma);
    const Dense kv = kernel_from_distances(dvf, gamma);
    for (Eigen::Index li = 0; li < nl; ++li) {
      Dense a = kf;
      a.diagonal().array() += r.lambdas[static_cast<std::size_t>(li)];
      const Eigen::LLT<Dense> llt(a);
      if (llt.info() != Eigen::Success)
        continue;
      const Dense alpha = llt.solve(rhs);
      const Dense pred = kv * alpha;
      if (!pred.allFinite())
        continue;
      r.scores(static_cast<Eigen::Index>(gi), li) =
          (pred - Dense(yv)).rowwise().norm().mean();
    }
  });

  double best = kInf;
  bool found = false;
  for (Eigen::Index gi = 0; gi < ng; ++gi) {
    for (Eigen::Index li = 0; li < nl; ++li) {
      const double s = r.scores(gi, li);
      if (s < best) {
        best = s;
        r.gamma = r.gammas[static_cast<std::size_t>(gi)];
        r.lambda = r.lambdas[static_cast<std::size_t>(li)];
        found = true;
      }
    }
  }
  if (!found)
    throw_numerical("every grid-search cell failed to fit");
  return r;
}

TwoStageModel train_two_stage(std::span<const Dataset> datasets, const TrainOptions& options) {
  if (datasets.empty())
    throw_invalid("training needs at least one dataset");
  const std::string hash = datasets.front().metadata.config_hash;
  std::size_t total = 0;
  for (const Dataset& ds : datasets) {
    if (ds.metadata.config_hash != hash)
      throw_data("config hash mismatch between training datasets (" + hash + " vs " +
                 ds.metadata.config_hash + ")");
    total += ds.samples.size();
  }
  if (options.lambda.has_value() != options.gamma.has_value())
    throw_invalid("fixed hyperparameters need both lambda and gamma");
  if (options.max_regression_samples == 0)
    throw_invalid("max_regression_samples must be positive");

  std::vector<const Sample*> samples;
  samples.reserve(total);
  for (const Dataset& ds : datasets)
    for (const Sample& s : ds.samples)
      samples.push_back(&s);

  Matrix raw(static_cast<Eigen::Index>(total), kFeatures);
  std::vector<int> labels(total);
  for (std::size_t i = 0; i < total; ++i) {
    const FeatureVector f = extract_features(samples[i]->frame());
    for (int j = 0; j < kFeatures; ++j)
      raw(static_cast<Eigen::Index>(i), j) = f[static_cast<std::size_t>(j)];
    labels[i] = samples[i]->d >= 0.0 ? 1 : -1;
  }

  if (std::count(labels.begin(), labels.end(), 1) == 0 ||
      std::count(labels.begin(), labels.end(), -1) == 0)
    throw_data("training data needs both hover (d < 0) and contact (d >= 0) samples");

  TwoStageModel model;
  model.config_hash = hash;
  model.scaler = Standardizer::fit(raw);
  const Matrix xs = model.scaler.apply(raw);

  SvmOptions svm = options.svm;
  svm.seed = derive_seed(options.seed, "classifier");
  model.classifier = svm_train(xs, labels, svm);

  // Contact pool with exact duplicates (mirrored ascent, repeated hover
  // frames) collapsed.
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < total; ++i)
    if (samples[i]->d >= 0.0)
      pool.push_back(i);
  if (pool.empty())
    throw_data("training data has no contact samples (d >= 0)");
  auto key_less = [&](std::size_t a, std::size_t b) {
    const Sample& p = *samples[a];
    const Sample& q = *samples[b];
    if (p.x != q.x)
      return p.x < q.x;
    if (p.y != q.y)
      return p.y < q.y;
    if (p.d != q.d)
      return p.d < q.d;
    for (Eigen::Index j = 0; j < kFeatures; ++j)
      if (raw(static_cast<Eigen::Index>(a), j) != raw(static_cast<Eigen::Index>(b), j))
        return raw(static_cast<Eigen::Index>(a), j) < raw(static_cast<Eigen::Index>(b), j);
    return a < b;
  };
  std::sort(pool.begin(), pool.end(), key_less);
  std::vector<std::size_t> unique_pool;
  for (std::size_t idx : pool) {
    if (!unique_pool.empty()) {
      const std::size_t prev = unique_pool.back();
      const Sample& p = *samples[prev];
      const Sample& q = *samples[idx];
      if (p.x == q.x && p.y == q.y && p.d == q.d &&
          raw.row(static_cast<Eigen::Index>(prev)) == raw.row(static_cast<Eigen::Index>(idx)))
        continue;
    }
    unique_pool.push_back(idx);
  }
  const std::size_t pool_size = unique_pool.size();
  if (unique_pool.size() > options.max_regression_samples) {
    Rng rng(derive_seed(options.seed, "subsample"));
    std::shuffle(unique_pool.begin(), unique_pool.end(), rng.engine());
    unique_pool.resize(options.max_regression_samples);
    std::sort(unique_pool.begin(), unique_pool.end());
  }

  const auto nr = static_cast<Eigen::Index>(unique_pool.size());
  Matrix xr(nr, kFeatures);
  Matrix yr(nr, 3);
  for (Eigen::Index i = 0; i < nr; ++i) {
    const std::size_t idx = unique_pool[static_cast<std::size_t>(i)];
    xr.row(i) = xs.row(static_cast<Eigen::Index>(idx));
    yr(i, 0) = samples[idx]->x;
    yr(i, 1) = samples[idx]->y;
    yr(i, 2) = samples[idx]->d;
  }

  model.target_offset = yr.colwise().mean().transpose();
  yr.rowwise() -= model.target_offset.transpose();

  TrainingReport& rep = model.report;
  rep.seed = options.seed;
  if (options.lambda) {
    rep.lambda = *options.lambda;
    rep.gamma = *options.gamma;
    rep.grid_searched = false;
  } else {
    const std::uint64_t split_seed = derive_seed(options.seed, "grid");
    const GridSearchResult gs = grid_search(xr, yr, options.lambda_grid, options.gamma_grid,
                                            split_seed, options.threads);
    rep.lambda = gs.lambda;
    rep.gamma = gs.gamma;
    rep.grid_searched = true;
    rep.split_seed = gs.split_seed;
    rep.lambda_grid = gs.lambdas;
    rep.gamma_grid = gs.gammas;
    for (Eigen::Index gi = 0; gi < gs.scores.rows(); ++gi)
      for (Eigen::Index li = 0; li < gs.scores.cols(); ++li)
        rep.grid_scores.push_back(gs.scores(gi, li));
  }
  model.regressor = krr_fit(xr, yr, rep.lambda, rep.gamma);

  rep.classifier_samples = total;
  rep.regression_pool = pool_size;
  rep.regression_samples = unique_pool.size();
  rep.svm_c = model.classifier.c;
  rep.svm_duality_gap = model.classifier.duality_gap;
  rep.svm_epochs = model.classifier.epochs;
  rep.krr_residual = krr_relative_residual(model.regressor, yr);
  for (const Dataset& ds : datasets)
    rep.dataset_seeds.push_back(ds.metadata.seed);
  return model;
}

Matrix standardized_features(const TwoStageModel& model, std::span<const SignalFrame> frames) {
  Matrix raw(static_cast<Eigen::Index>(frames.size()), kFeatures);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FeatureVector f = extract_features(frames[i]);
    for (int j = 0; j < kFeatures; ++j)
      raw(static_cast<Eigen::Index>(i), j) = f[static_cast<std::size_t>(j)];
  }
  return model.scaler.apply(raw);
}

Matrix localize(const TwoStageModel& model, const Matrix& x) {
  Matrix p = krr_predict(model.regressor, x);
  p.rowwise() += model.target_offset.transpose();
  return p;
}

TouchReport predict(const TwoStageModel& model, const SignalFrame& frame) {
  const Matrix x = standardized_features(model, std::span<const SignalFrame>(&frame, 1));
  TouchReport r;
  r.score = svm_decision(model.classifier, std::span<const double>(x.data(), kFeatures));
  r.touch = r.score > 0.0;
  if (!r.touch)
    return r;
  const Matrix p = localize(model, x);
  r.x = p(0, 0);
  r.y = p(0, 1);
  r.d = p(0, 2);
  return r;
}

std::string report_to_json(const TrainingReport& rep) {
  json scores = json::array();
  for (double s : rep.grid_scores)
    scores.push_back(score_to_json(s));
  json j = {
      {"lambda", rep.lambda},
      {"gamma", rep.gamma},
      {"grid_searched", rep.grid_searched},
      {"seed", rep.seed},
      {"split_seed", rep.split_seed},
      {"lambda_grid", rep.lambda_grid},
      {"gamma_grid", rep.gamma_grid},
      {"grid_scores", scores},
      {"classifier_samples", rep.classifier_samples},
      {"regression_pool", rep.regression_pool},
      {"regression_samples", rep.regression_samples},
      {"svm_c", rep.svm_c},
      {"svm_duality_gap", rep.svm_duality_gap},
      {"svm_epochs", rep.svm_epochs},
      {"krr_residual", rep.krr_residual},
      {"dataset_seeds", rep.dataset_seeds},
  };
  return j.dump(2);
}

namespace {

TrainingReport report_from(const json& j) {
  TrainingReport rep;
  rep.lambda = j.at("lambda").get<double>();
  rep.gamma = j.at("gamma").get<double>();
  rep.grid_searched = j.at("grid_searched").get<bool>();
  rep.seed = j.at("seed").get<std::uint64_t>();
  rep.split_seed = j.at("split_seed").get<std::uint64_t>();
  rep.lambda_grid = j.at("lambda_grid").get<std::vector<double>>();
  rep.gamma_grid = j.at("gamma_grid").get<std::vector<double>>();
  for (const json& s : j.at("grid_scores"))
    rep.grid_scores.push_back(score_from_json(s));
  rep.classifier_samples = j.at("classifier_samples").get<std::size_t>();
  rep.regression_pool = j.at("regression_pool").get<std::size_t>();
  rep.regression_samples = j.at("regression_samples").get<std::size_t>();
  rep.svm_c = j.at("svm_c").get<double>();
  rep.svm_duality_gap = j.at("svm_duality_gap").get<double>();
  rep.svm_epochs = j.at("svm_epochs").get<std::size_t>();
  rep.krr_residual = j.at("krr_residual").get<double>();
  rep.dataset_seeds = j.at("dataset_seeds").get<std::vector<std::uint64_t>>();
  return rep;
}

}  // namespace

std::string model_to_json(const TwoStageModel& m) {
  json j;
  j["schema"] = "edgetouch-model-v1";
  j["config_hash"] = m.config_hash;
  j["normalization"] = {{"mean", vector_to_json(m.scaler.mean)},
                        {"scale", vector_to_json(m.scaler.scale)}};
  j["classifier"] = {{"weights", vector_to_json(m.classifier.weights)},
                     {"bias", m.classifier.bias},
                     {"c", m.classifier.c},
                     {"duality_gap", m.classifier.duality_gap},
                     {"epochs", m.classifier.epochs}};
  j["regressor"] = {{"lambda", m.regressor.lambda},
                    {"gamma", m.regressor.gamma},
                    {"train", matrix_to_json(m.regressor.train)},
                    {"alpha", matrix_to_json(m.regressor.alpha)},
                    {"target_offset", vector_to_json(m.target_offset)}};
  j["report"] = json::parse(report_to_json(m.report));
  return j.dump() + "\n";
}

TwoStageModel model_from_json(const std::string& text, const std::string& origin) {
  try {
    const json j = json::parse(text);
    if (j.at("schema").get<std::string>() != "edgetouch-model-v1")
      throw_data(origin + ": unsupported model schema");
    TwoStageModel m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.scaler.mean = vector_from_json(j.at("normalization").at("mean"));
    m.scaler.scale = vector_from_json(j.at("normalization").at("scale"));
    const json& c = j.at("classifier");
    m.classifier.weights = vector_from_json(c.at("weights"));
    m.classifier.bias = c.at("bias").get<double>();
    m.classifier.c = c.at("c").get<double>();
    m.classifier.duality_gap = c.at("duality_gap").get<double>();
    m.classifier.epochs = c.at("epochs").get<std::size_t>();
    const json& r = j.at("regressor");
    m.regressor.lambda = r.at("lambda").get<double>();
    m.regressor.gamma = r.at("gamma").get<double>();
    m.regressor.train = matrix_from_json(r.at("train"), kFeatures);
    m.regressor.alpha = matrix_from_json(r.at("alpha"), 3);
    m.target_offset = vector_from_json(r.at("target_offset"));
    m.report = report_from(j.at("report"));
    if (m.scaler.mean.size() != kFeatures || m.scaler.scale.size() != kFeatures ||
        m.classifier.weights.size() != kFeatures || m.regressor.train.cols() != kFeatures ||
        m.regressor.alpha.rows() != m.regressor.train.rows() || m.regressor.alpha.cols() != 3 ||
        m.target_offset.size() != 3)
      throw_data(origin + ": model dimensions are inconsistent");
    return m;
  } catch (const json::exception& e) {
    throw_data(origin + ": malformed model file: " + e.what());
  }
}

void save_model(const TwoStageModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw_data("cannot write model: " + path.string());
  out << model_to_json(model);
  out.flush();
  if (!out)
    throw_data("write failed: " + path.string());
}

TwoStageModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw_data("cannot open model: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str(), path.string());
}

}  // namespace edgetouch
