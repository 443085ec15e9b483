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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "edgetouch/vec3.hpp"

namespace edgetouch {

/// Probe tip axis position and penetration. depth > 0 is into the
/// elastomer, depth <= 0 means the tip hovers and the surface is flat.
struct IndenterState {
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;
};

struct SurfaceModel {
  double slab_thickness = 8.0;
  double tip_radius = 3.0;
  double decay_length = 2.0;
};

void validate(const SurfaceModel& model);

/// Radial height profile of the indented top surface, solved once per
/// indenter state.
///
/// Inside the contact disc (r <= a) the surface follows the lower cap of the
/// rigid tip sphere; outside it relaxes as -A exp(-(r - a) / L). The contact
/// radius a is chosen so the two pieces meet with matching value and slope,
/// which gives A = L a / sqrt(R^2 - a^2) and
///   depth - R + sqrt(R^2 - a^2) = L a / sqrt(R^2 - a^2).
class IndentProfile {
 public:
  IndentProfile(double depth, const SurfaceModel& model);

  bool flat() const { return depth_ <= 0.0; }
  double depth() const { return depth_; }
  double contact_radius() const { return contact_radius_; }
  double skirt_amplitude() const { return skirt_amplitude_; }
  double tip_radius() const { return tip_radius_; }

  /// Height offset (<= 0) at radial distance r from the tip axis.
  double height(double r) const {
    if (depth_ <= 0.0)
      return 0.0;
    if (r <= contact_radius_)
      return tip_radius_ - depth_ - std::sqrt(tip_radius_ * tip_radius_ - r * r);
    return -skirt_amplitude_ * std::exp(-(r - contact_radius_) * inv_decay_);
  }

  /// dh/dr (>= 0).
  double slope(double r) const {
    if (depth_ <= 0.0)
      return 0.0;
    if (r <= contact_radius_)
      return r / std::sqrt(tip_radius_ * tip_radius_ - r * r);
    return skirt_amplitude_ * inv_decay_ * std::exp(-(r - contact_radius_) * inv_decay_);
  }

  /// Height and slope together (one exponential).
  std::pair<double, double> height_and_slope(double r) const {
    if (depth_ <= 0.0)
      return {0.0, 0.0};
    if (r <= contact_radius_) {
      const double s = std::sqrt(tip_radius_ * tip_radius_ - r * r);
      return {tip_radius_ - depth_ - s, r / s};
    }
    const double e = skirt_amplitude_ * std::exp(-(r - contact_radius_) * inv_decay_);
    return {-e, e * inv_decay_};
  }

  /// Largest slope over r in [r_lo, r_hi].
  double max_slope(double r_lo, double r_hi) const {
    if (depth_ <= 0.0)
      return 0.0;
    if (r_lo <= contact_radius_ && contact_radius_ <= r_hi)
      return skirt_amplitude_ * inv_decay_;
    return std::max(slope(r_lo), slope(r_hi));
  }

 private:
  double depth_;
  double tip_radius_;
  double inv_decay_;
  double contact_radius_ = 0.0;
  double skirt_amplitude_ = 0.0;
};

/// z offset of the top surface at (x, y); always <= 0.
double surface_height(double x, double y, const IndenterState& indenter,
                      const SurfaceModel& model);

/// Upward unit normal of the top surface from the analytic gradient.
Vec3 surface_normal(double x, double y, const IndenterState& indenter,
                    const SurfaceModel& model);

/// Piecewise-linear depth -> force calibration. Knots start at (0, 0), depths
/// strictly increase and forces never decrease.
class StiffnessCurve {
 public:
  explicit StiffnessCurve(std::vector<std::pair<double, double>> knots);

  /// Approximate 1:20 PDMS curve for the 6 mm hemispherical tip. Only the
  /// (0.6 mm, 2 N) knot is a measured anchor; the rest follow a Hertzian
  /// d^1.5 shape through it.
  static StiffnessCurve default_curve();

  /// Two whitespace-separated columns (depth_mm force_N); '#' starts a comment.
  static StiffnessCurve load(const std::filesystem::path& path);

  const std::vector<std::pair<double, double>>& knots() const { return knots_; }

 private:
  std::vector<std::pair<double, double>> knots_;
};

/// Hovering (negative) depths give zero force. Throws "outside calibration"
/// past the last knot.
double depth_to_force(double depth, const StiffnessCurve& curve);

}  // namespace edgetouch
