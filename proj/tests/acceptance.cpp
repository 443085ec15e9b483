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

// Acceptance run: one PASS/FAIL line per criterion.
//
//   edgetouch_acceptance [--work DIR] [--rays N] [--threads N] [--only LIST]
//
// Criteria 7 and 8 run the full replication preset twice and take hours on a
// single core at the default ray count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edgetouch/config_io.hpp"
#include "edgetouch/evaluation.hpp"
#include "edgetouch/learning.hpp"
#include "edgetouch/optics.hpp"
#include "edgetouch/plan.hpp"
#include "edgetouch/random.hpp"
#include "edgetouch/protocols.hpp"
#include "edgetouch/sensor.hpp"
#include "edgetouch/transport.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace edgetouch;
using namespace edgetouch::testing;

namespace {

// Pinned tolerances.
constexpr double kConservationTol = 1e-9;         // relative
constexpr int kConservationCases = 1000;
constexpr double kConservationBudgetS = 60.0;
constexpr double kOpticsTol = 1e-9;
constexpr int kOpticsCases = 10000;
constexpr double kCriticalDeg = 45.58;
constexpr double kCriticalTolDeg = 0.01;
constexpr double kFlatLengthMm = 1.0;
constexpr double kFlatRelTol = 0.02;
constexpr double kDeadbandBudgetS = 120.0;
constexpr double kKrrTol = 1e-8;                  // relative
constexpr double kKrrSingleTol = 1e-12;
constexpr int kKrrCases = 100;
constexpr double kSvmDualTol = 1e-4;
constexpr int kSvmDualCases = 20;
constexpr double kClassRateAt1mm = 0.9;
constexpr double kLocRatio = 2.0;                 // err(0.1) >= 2 err(1.0)
constexpr double kLocMedianMax = 1.5;             // mm, slices >= 1 mm
constexpr double kDepthMedianMax = 0.3;           // mm, slices >= 1 mm
constexpr std::size_t kGridLocations = 121;
constexpr int kFields = 75;
constexpr std::uint64_t kSeed = 2017;

struct Options {
  fs::path work = "acceptance-work";
  std::size_t rays = 50000;
  unsigned threads = 0;
  std::set<int> only;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

Vec3 random_unit(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  return normalized(Vec3{n(g), n(g), n(g)});
}

Grid to_grid(const Matrix& m) {
  Grid g(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    g[static_cast<std::size_t>(i)].assign(m.row(i).data(), m.row(i).data() + m.cols());
  return g;
}

Matrix random_matrix(std::mt19937_64& g, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = n(g);
  return m;
}

// 1 ---------------------------------------------------------------------------
Outcome conservation(const Options&) {
  const auto t0 = Clock::now();
  const SensorConfig cfg = SensorConfig::default_config();
  std::mt19937_64 g(101);
  std::uniform_real_distribution<double> pos(6.0, 26.0);
  std::uniform_real_distribution<double> depth(-2.0, 5.0);
  std::uniform_real_distribution<double> refl(0.0, 1.0);
  std::uniform_int_distribution<int> emitter(0, 7);
  double worst = 0.0;
  for (int i = 0; i < kConservationCases; ++i) {
    CavityGeometry geo = cavity_geometry(cfg);
    geo.wall_reflectance = refl(g);
    Emitter e = cfg.emitters[static_cast<std::size_t>(emitter(g))];
    e.rays_per_state = 1000;
    const TraceResult r = trace_state(e, cfg.receivers, IndenterState{pos(g), pos(g), depth(g)},
                                      geo, derive_seed(101, "case", static_cast<std::uint64_t>(i)));
    const double err =
        std::abs(r.total_received() + r.absorbed + r.escaped - r.emitted) / r.emitted;
    worst = std::max(worst, err);
  }
  const double t = seconds_since(t0);
  return {worst <= kConservationTol && t < kConservationBudgetS,
          "worst relative imbalance " + num(worst) + " over " +
              std::to_string(kConservationCases) + " traces, " + num(t, 3) + " s"};
}

// 2 ---------------------------------------------------------------------------
Outcome optics(const Options&) {
  std::mt19937_64 g(202);
  std::uniform_real_distribution<double> idx(1.0, 2.0);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> rad(0.1, 5.0);
  double worst_snell = 0.0, worst_sphere = 0.0;
  int mismatched = 0;
  for (int i = 0; i < kOpticsCases; ++i) {
    const double n_out = idx(g);
    const double n_in = n_out * idx(g);
    const Vec3 d = random_unit(g);
    const Vec3 n = random_unit(g);
    const auto got = interact_at_interface(Ray{{0, 0, 0}, d}, n, n_in, n_out);
    const auto want = snell_oracle(d, n, n_in, n_out);
    if ((got.event == InterfaceEvent::kReflected) != want.tir)
      ++mismatched;
    else
      worst_snell = std::max(worst_snell, norm(got.ray.direction - want.direction));
  }
  for (int i = 0; i < kOpticsCases; ++i) {
    const Vec3 o{u(g), u(g), u(g)};
    const Vec3 c{0.3 * u(g), 0.3 * u(g), 0.3 * u(g)};
    const Vec3 d = (i % 2) ? normalized(c - o + random_unit(g) * rad(g)) : random_unit(g);
    const double r = rad(g);
    const auto got = intersect_sphere(Ray{o, d}, c, r);
    const auto want = sphere_oracle(o, d, c, r);
    if (got.has_value() != want.has_value())
      ++mismatched;
    else if (got)
      worst_sphere =
          std::max(worst_sphere, std::abs(*got - *want) / std::max(1.0, std::abs(*want)));
  }
  const double crit = rad_to_deg(critical_angle(kPdms.refractive_index, kAir.refractive_index));
  const bool pass = mismatched == 0 && worst_snell <= kOpticsTol && worst_sphere <= kOpticsTol &&
                    std::abs(crit - kCriticalDeg) <= kCriticalTolDeg;
  return {pass, "snell " + num(worst_snell) + ", sphere " + num(worst_sphere) + ", branch mismatches " +
                    std::to_string(mismatched) + ", critical angle " + num(crit, 6) + " deg"};
}

// 3 ---------------------------------------------------------------------------
Outcome deadband(const Options& opt) {
  const auto t0 = Clock::now();
  const SensorConfig cfg = SensorConfig::default_config();
  Emitter e = cfg.emitters[7];
  e.rays_per_state = opt.rays;
  const Receiver r = cfg.receivers[2];
  std::vector<double> depths;
  for (int i = 0; i <= 50; ++i)
    depths.push_back(std::round(i * 0.1 * 1e9) / 1e9);
  const CavityGeometry geo = cavity_geometry(cfg);
  const DeadbandSeries thin = deadband_profile(8.0, depths, e, r, geo, kSeed);
  const DeadbandSeries thick = deadband_profile(12.0, depths, e, r, geo, kSeed);

  bool decreasing = true;
  for (std::size_t i = 1; i < depths.size() && depths[i] <= 0.5 + 1e-9; ++i)
    decreasing = decreasing && thin.signal[i] < thin.signal[i - 1];
  const auto flat8 = find_flat_interval(thin.depths, thin.signal, kFlatLengthMm, kFlatRelTol);
  const auto flat12 = find_flat_interval(thick.depths, thick.signal, kFlatLengthMm, kFlatRelTol);
  const double t = seconds_since(t0);
  const bool pass = decreasing && !flat8 && flat12 && t < kDeadbandBudgetS;
  std::string detail = "8 mm: " + std::string(decreasing ? "strictly decreasing" : "NOT decreasing") +
                       " over 0-0.5 mm (" + num(thin.signal[0]) + " -> " + num(thin.signal[5]) +
                       "), flat interval " + (flat8 ? "found" : "none") + "; 12 mm: ";
  detail += flat12 ? "deadband " + num(flat12->start, 3) + "-" + num(flat12->end, 3) + " mm"
                   : "no deadband";
  return {pass, detail + ", " + num(t, 3) + " s"};
}

// 4 ---------------------------------------------------------------------------
Outcome krr(const Options&) {
  std::mt19937_64 g(404);
  std::uniform_int_distribution<int> size(1, 50);
  std::uniform_real_distribution<double> logl(-3.0, 0.0);
  std::uniform_real_distribution<double> logg(-3.0, -1.0);
  double worst = 0.0;
  for (int inst = 0; inst < kKrrCases; ++inst) {
    const int n = size(g);
    const Matrix x = random_matrix(g, n, kFeatures);
    const Matrix y = random_matrix(g, n, 3, 5.0);
    const Matrix q = random_matrix(g, 8, kFeatures);
    const double lambda = std::pow(10.0, logl(g));
    const double gamma = std::pow(10.0, logg(g));
    const KrrModel m = krr_fit(x, y, lambda, gamma);
    const Grid alpha = krr_alpha_oracle(to_grid(x), to_grid(y), lambda, gamma);
    const Grid want = krr_predict_oracle(to_grid(x), alpha, to_grid(q), gamma);
    const Matrix got = krr_predict(m, q);
    for (int i = 0; i < q.rows(); ++i)
      for (int k = 0; k < 3; ++k) {
        const double w = want[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
        worst = std::max(worst, std::abs(got(i, k) - w) / std::max(1.0, std::abs(w)));
      }
  }
  double worst_single = 0.0;
  for (double lambda : {1e-6, 2.15e-4, 1e-2, 1.0}) {
    const Matrix x = random_matrix(g, 1, kFeatures);
    const Matrix y = random_matrix(g, 1, 3, 5.0);
    const KrrModel m = krr_fit(x, y, lambda, 5.45e-4);
    const Vector p = krr_predict(m, std::span<const double>(x.data(), kFeatures));
    for (int k = 0; k < 3; ++k)
      worst_single = std::max(worst_single, std::abs(p(k) - y(0, k) / (1.0 + lambda)) /
                                                std::max(1.0, std::abs(y(0, k))));
  }
  return {worst <= kKrrTol && worst_single <= kKrrSingleTol,
          "worst relative deviation " + num(worst) + ", single-point " + num(worst_single)};
}

// 5 ---------------------------------------------------------------------------
Outcome svm(const Options&) {
  std::mt19937_64 g(505);
  std::normal_distribution<double> n(0.0, 0.3);
  int separable_ok = 0;
  const int separable_cases = 10;
  for (int inst = 0; inst < separable_cases; ++inst) {
    const int rows = 80, dim = 6;
    Matrix x(rows, dim);
    std::vector<int> labels(rows);
    const Vector dir = random_matrix(g, dim, 1).col(0).normalized();
    for (int i = 0; i < rows; ++i) {
      labels[static_cast<std::size_t>(i)] = i % 2 ? 1 : -1;
      for (int j = 0; j < dim; ++j)
        x(i, j) = n(g) + 2.0 * labels[static_cast<std::size_t>(i)] * dir(j) + 0.5;
    }
    SvmOptions o;
    o.c = 10.0;
    const LinearSvmModel m = svm_train(x, labels, o);
    int correct = 0;
    for (int i = 0; i < rows; ++i)
      correct += svm_decision(m, std::span<const double>(x.row(i).data(), dim)) *
                     labels[static_cast<std::size_t>(i)] > 0.0;
    separable_ok += correct == rows;
  }
  std::uniform_int_distribution<int> rows_d(8, 30);
  std::uniform_int_distribution<int> dim_d(2, 6);
  std::uniform_real_distribution<double> logc(-1.0, 1.0);
  double worst = 0.0;
  for (int inst = 0; inst < kSvmDualCases; ++inst) {
    const int rows = rows_d(g), dim = dim_d(g);
    const Matrix x = random_matrix(g, rows, dim);
    std::vector<int> labels(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i)
      labels[static_cast<std::size_t>(i)] = x(i, 0) + 0.6 * x(i, 1) + n(g) > 0 ? 1 : -1;
    labels[0] = 1;
    labels[1] = -1;
    SvmOptions o;
    o.c = std::pow(10.0, logc(g));
    o.tolerance = 1e-9;
    const LinearSvmModel m = svm_train(x, labels, o);
    worst = std::max(worst, std::abs(svm_primal_objective(m, x, labels) -
                                     svm_dual_oracle(to_grid(x), labels, o.c)));
  }
  return {separable_ok == separable_cases && worst <= kSvmDualTol,
          std::to_string(separable_ok) + "/" + std::to_string(separable_cases) +
              " separable sets at 100%, worst primal-dual deviation " + num(worst)};
}

// 6 ---------------------------------------------------------------------------
Outcome ambient(const Options& opt) {
  SensorConfig c = SensorConfig::default_config();
  for (auto& e : c.emitters)
    e.rays_per_state = std::min<std::size_t>(opt.rays, 5000);
  const std::vector<IndenterState> states{{16, 16, 0.0}, {9, 22, 0.4}, {24, 11, 2.5}, {12, 12, -3}};
  int identical = 0;
  double scale_seen = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    c.ambient_level = 0.0;
    const SignalFrame dark = scan(c, states[i], 600 + i);
    const double peak = *std::max_element(dark.readings.begin(), dark.readings.end());
    c.ambient_level = 10.0 * peak;
    scale_seen = c.ambient_level;
    const SignalFrame lit = scan(c, states[i], 600 + i);
    identical += extract_features(dark) == extract_features(lit);
  }
  return {identical == static_cast<int>(states.size()),
          std::to_string(identical) + "/" + std::to_string(states.size()) +
              " feature vectors bit-identical (ambient up to " + num(scale_seen) + ")"};
}

// 7, 8, 9 -------------------------------------------------------------------------

struct RunArtifacts {
  std::vector<fs::path> files;
  std::vector<std::pair<std::string, EvaluationResult>> evaluations;
  std::vector<PlannedDataset> datasets;
};

RunArtifacts replication_run(const Options& opt, const fs::path& dir) {
  fs::remove_all(dir);
  ExperimentPlan plan = replication_plan(dir / "data", kSeed);
  plan.rays_per_state = opt.rays;
  RunArtifacts art;
  art.datasets = run_simulation(plan, opt.threads, [](const std::string& msg) {
    std::fprintf(stderr, "  %s\n", msg.c_str());
  });
  std::vector<Dataset> train;
  std::vector<std::pair<std::string, Dataset>> test;
  for (const auto& pd : art.datasets) {
    art.files.push_back(pd.path);
    if (pd.role == "train")
      train.push_back(load_dataset(pd.path));
    else
      test.emplace_back(pd.path.stem().string(), load_dataset(pd.path));
  }
  TrainOptions to;
  to.seed = kSeed;
  to.threads = opt.threads;
  const auto t0 = Clock::now();
  const TwoStageModel model = train_two_stage(train, to);
  std::fprintf(stderr, "  trained in %.1f s (lambda %g, gamma %g)\n", seconds_since(t0),
               model.report.lambda, model.report.gamma);
  fs::create_directories(dir / "model");
  save_model(model, dir / "model" / "model.json");
  art.files.push_back(dir / "model" / "model.json");
  for (const auto& [stem, ds] : test) {
    EvaluationResult r = evaluate(model, ds);
    const EvaluationFiles f = write_evaluation(r, ds, dir / "eval", stem);
    art.files.insert(art.files.end(), {f.classification, f.regression, f.csv, f.arrows});
    art.evaluations.emplace_back(stem, std::move(r));
  }
  return art;
}

Outcome trends(const RunArtifacts& art) {
  bool pass = !art.evaluations.empty();
  std::string detail;
  for (const auto& [stem, r] : art.evaluations) {
    // (a) classification over 0..1.0 mm
    bool monotone = true;
    double prev = -1.0, at1 = -1.0;
    std::string rates;
    for (const auto& row : r.classification) {
      if (row.depth < -1e-9 || !row.rate)
        continue;
      monotone = monotone && *row.rate >= prev;
      prev = *row.rate;
      rates += (rates.empty() ? "" : "/") + num(*row.rate, 3);
      if (std::abs(row.depth - 1.0) < 1e-9)
        at1 = *row.rate;
    }
    const bool a = monotone && at1 >= kClassRateAt1mm;
    // (b) median localization strictly decreasing, err(0.1) >= 2 err(1.0)
    bool b = true;
    double prev_loc = INFINITY, e01 = NAN, e1 = NAN;
    bool c = true;
    std::string meds, deep;
    for (std::size_t k = 0; k < r.regression.size(); ++k) {
      const auto& m = r.regression[k];
      if (!m) {
        b = c = false;
        continue;
      }
      const double loc = m->localization.median;
      meds += (meds.empty() ? "" : "/") + num(loc, 3);
      b = b && loc < prev_loc;
      prev_loc = loc;
      if (std::abs(m->depth - 0.1) < 1e-9)
        e01 = loc;
      if (std::abs(m->depth - 1.0) < 1e-9)
        e1 = loc;
      if (m->depth >= 1.0 - 1e-9) {
        c = c && loc <= kLocMedianMax && m->depth_error.median <= kDepthMedianMax;
        deep += (deep.empty() ? "" : "/") + num(m->depth_error.median, 3);
      }
    }
    b = b && e01 >= kLocRatio * e1;
    pass = pass && a && b && c;
    detail += (detail.empty() ? "" : "; ") + stem + ": (a) " + (a ? "ok" : "FAIL") +
              " rates 0-1mm " + rates + ", (b) " + (b ? "ok" : "FAIL") + " loc medians " + meds +
              ", (c) " + (c ? "ok" : "FAIL") + " depth medians >=1mm " + deep;
  }
  return {pass, detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const RunArtifacts& a, const RunArtifacts& b, const fs::path& da,
                    const fs::path& db) {
  if (a.files.size() != b.files.size())
    return {false, "different artifact counts"};
  int differing = 0;
  std::string first;
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    const fs::path ra = fs::relative(a.files[i], da);
    const fs::path rb = fs::relative(b.files[i], db);
    if (ra != rb || slurp(a.files[i]) != slurp(b.files[i])) {
      if (first.empty())
        first = ra.string();
      ++differing;
    }
  }
  return {differing == 0, std::to_string(a.files.size() - static_cast<std::size_t>(differing)) +
                              "/" + std::to_string(a.files.size()) + " artifacts bytewise identical" +
                              (first.empty() ? "" : " (first difference: " + first + ")")};
}

Outcome counts(const RunArtifacts& art) {
  const SensorConfig c = SensorConfig::default_config();
  const auto grid = grid_pattern(c.cavity_side, c.active_area_side, 2.0, 3.0, kSeed);
  std::size_t bad_lines = 0, lines = 0;
  for (const auto& pd : art.datasets) {
    std::ifstream in(pd.path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#')
        continue;
      std::istringstream ss(line);
      std::string tok;
      int n = 0;
      while (ss >> tok) {
        char* end = nullptr;
        std::strtod(tok.c_str(), &end);
        n += *end == '\0';
      }
      ++lines;
      bad_lines += n != kFields;
    }
  }
  std::size_t grid_locations = 0;
  for (const auto& pd : art.datasets)
    if (pd.kind == "grid") {
      std::set<std::pair<double, double>> locs;
      for (const Sample& s : load_dataset(pd.path).samples)
        locs.insert({s.x, s.y});
      grid_locations = std::max(grid_locations, locs.size());
      if (locs.size() != kGridLocations)
        grid_locations = 0;
    }
  const bool pass = grid.size() == kGridLocations && grid_locations == kGridLocations &&
                    bad_lines == 0 && lines > 0;
  return {pass, "default grid " + std::to_string(grid.size()) + " locations, grid datasets " +
                    std::to_string(grid_locations) + ", " + std::to_string(lines) + " lines, " +
                    std::to_string(bad_lines) + " without exactly 75 fields"};
}

void report(int id, const Outcome& o) {
  std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

bool wanted(const Options& o, int id) { return o.only.empty() || o.only.count(id); }

}  // namespace

int main(int argc, char** argv) {
  Options opt;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto value = [&]() -> std::string {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value for %s\n", a.c_str());
        std::exit(1);
      }
      return argv[++i];
    };
    if (a == "--work")
      opt.work = value();
    else if (a == "--rays")
      opt.rays = std::stoul(value());
    else if (a == "--threads")
      opt.threads = static_cast<unsigned>(std::stoul(value()));
    else if (a == "--only") {
      std::stringstream ss(value());
      std::string tok;
      while (std::getline(ss, tok, ','))
        opt.only.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "unknown argument %s\n", a.c_str());
      return 1;
    }
  }

  bool all = true;
  auto run = [&](int id, const std::function<Outcome()>& fn) {
    if (!wanted(opt, id))
      return;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    report(id, o);
  };

  run(1, [&] { return conservation(opt); });
  run(2, [&] { return optics(opt); });
  run(3, [&] { return deadband(opt); });
  run(4, [&] { return krr(opt); });
  run(5, [&] { return svm(opt); });
  run(6, [&] { return ambient(opt); });

  if (wanted(opt, 7) || wanted(opt, 8) || wanted(opt, 9)) {
    RunArtifacts first, second;
    bool ran = false;
    const auto t0 = Clock::now();
    try {
      first = replication_run(opt, opt.work / "run1");
      ran = true;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "replication run failed: %s\n", e.what());
    }
    const double t_run = seconds_since(t0);
    run(7, [&] {
      if (!ran)
        return Outcome{false, "replication run failed"};
      Outcome o = trends(first);
      o.detail += ", " + num(t_run / 60.0, 3) + " min at " + std::to_string(opt.rays) + " rays";
      return o;
    });
    run(8, [&] {
      if (!ran)
        return Outcome{false, "replication run failed"};
      second = replication_run(opt, opt.work / "run2");
      return determinism(first, second, opt.work / "run1", opt.work / "run2");
    });
    run(9, [&] {
      if (!ran)
        return Outcome{false, "replication run failed"};
      return counts(first);
    });
  }
  std::printf("acceptance: %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
