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

#include "edgetouch/surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "edgetouch/error.hpp"

namespace edgetouch {

void validate(const SurfaceModel& model) {
  if (!(model.slab_thickness > 0.0))
    throw_invalid("slab thickness must be positive");
  if (!(model.tip_radius > 0.0))
    throw_invalid("tip radius must be positive");
  if (!(model.decay_length > 0.0))
    throw_invalid("decay length must be positive");
}

IndentProfile::IndentProfile(double depth, const SurfaceModel& model)
    : depth_(depth), tip_radius_(model.tip_radius), inv_decay_(1.0 / model.decay_length) {
  if (depth_ > model.slab_thickness)
    throw_invalid("indentation depth exceeds slab thickness");
  if (depth_ <= 0.0)
    return;

  // Matching condition f(a) = d - R + sqrt(R^2 - a^2) - L a / sqrt(R^2 - a^2)
  // is strictly decreasing on [0, R) with f(0) = d > 0, so bisection on the
  // bracket converges to the unique root.
  const double r = model.tip_radius;
  const double l = model.decay_length;
  auto f = [&](double a) {
    const double c = std::sqrt(r * r - a * a);
    return depth_ - r + c - l * a / c;
  };
  double lo = 0.0;
  double hi = r;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi)
      break;
    if (f(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  contact_radius_ = lo;
  skirt_amplitude_ = l * lo / std::sqrt(r * r - lo * lo);
}

double surface_height(double x, double y, const IndenterState& indenter,
                      const SurfaceModel& model) {
  if (indenter.depth <= 0.0)
    return 0.0;
  const IndentProfile profile(indenter.depth, model);
  return profile.height(std::hypot(x - indenter.x, y - indenter.y));
}

Vec3 surface_normal(double x, double y, const IndenterState& indenter,
                    const SurfaceModel& model) {
  if (indenter.depth <= 0.0)
    return {0.0, 0.0, 1.0};
  const IndentProfile profile(indenter.depth, model);
  const double dx = x - indenter.x;
  const double dy = y - indenter.y;
  const double r = std::hypot(dx, dy);
  if (r == 0.0)
    return {0.0, 0.0, 1.0};
  const double s = profile.slope(r) / r;
  return normalized(Vec3{-s * dx, -s * dy, 1.0});
}

StiffnessCurve::StiffnessCurve(std::vector<std::pair<double, double>> knots)
    : knots_(std::move(knots)) {
  if (knots_.size() < 2)
    throw_data("stiffness curve needs at least two knots");
  if (knots_.front().first != 0.0 || knots_.front().second != 0.0)
    throw_data("stiffness curve must start at (0, 0)");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i].first > knots_[i - 1].first))
      throw_data("stiffness curve depths must strictly increase");
    if (knots_[i].second < knots_[i - 1].second)
      throw_data("stiffness curve forces must not decrease");
  }
}

StiffnessCurve StiffnessCurve::default_curve() {
  return StiffnessCurve({{0.0, 0.0},
                         {0.2, 0.385},
                         {0.4, 1.089},
                         {0.6, 2.0},
                         {1.0, 4.303},
                         {2.0, 12.17},
                         {3.0, 22.36},
                         {4.0, 34.43},
                         {5.0, 48.11}});
}

StiffnessCurve StiffnessCurve::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw_data("cannot open stiffness curve: " + path.string());
  std::vector<std::pair<double, double>> knots;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ss(line);
    double depth = 0.0;
    double force = 0.0;
    if (!(ss >> depth))
      continue;
    if (!(ss >> force))
      throw_data(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    knots.emplace_back(depth, force);
  }
  return StiffnessCurve(std::move(knots));
}

double depth_to_force(double depth, const StiffnessCurve& curve) {
  const auto& k = curve.knots();
  if (depth < 0.0)
    return 0.0;
  if (!(depth >= k.front().first && depth <= k.back().first))
    throw_invalid("depth " + std::to_string(depth) + " mm is outside calibration");
  auto it = std::upper_bound(k.begin(), k.end(), depth,
                             [](double d, const auto& knot) { return d < knot.first; });
  if (it == k.end())
    return k.back().second;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double w = (depth - lo.first) / (hi.first - lo.first);
  return lo.second + w * (hi.second - lo.second);
}

}  // namespace edgetouch
