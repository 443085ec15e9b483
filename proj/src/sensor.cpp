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

#include "edgetouch/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "edgetouch/error.hpp"
#include "edgetouch/random.hpp"

namespace edgetouch {
namespace {

constexpr double kWallTol = 1e-9;

// Counter-clockwise arc length along the perimeter, starting at the origin
// corner. Returns a negative value off the walls.
double perimeter_coordinate(const Vec3& p, double side) {
  if (std::abs(p.y) < kWallTol)
    return p.x;
  if (std::abs(p.x - side) < kWallTol)
    return side + p.y;
  if (std::abs(p.y - side) < kWallTol)
    return 2.0 * side + (side - p.x);
  if (std::abs(p.x) < kWallTol)
    return 3.0 * side + (side - p.y);
  return -1.0;
}

Vec3 inward_normal(const Vec3& p, double side) {
  if (std::abs(p.y) < kWallTol)
    return {0.0, 1.0, 0.0};
  if (std::abs(p.x - side) < kWallTol)
    return {-1.0, 0.0, 0.0};
  if (std::abs(p.y - side) < kWallTol)
    return {0.0, -1.0, 0.0};
  return {1.0, 0.0, 0.0};
}

}  // namespace

SensorConfig SensorConfig::default_config() {
  SensorConfig c;
  const double s = c.cavity_side;
  const double z = 0.5 * c.surface.slab_thickness;
  // Perimeter slots 4, 12, 20, 28 mm along each side, E R E R going round.
  const double offsets[4] = {4.0, 12.0, 20.0, 28.0};
  auto on_side = [&](int side_index, double u) -> Vec3 {
    switch (side_index) {
      case 0: return {u, 0.0, z};
      case 1: return {s, u, z};
      case 2: return {s - u, s, z};
      default: return {0.0, s - u, z};
    }
  };
  for (int side_index = 0; side_index < 4; ++side_index) {
    for (int slot = 0; slot < 4; ++slot) {
      const Vec3 p = on_side(side_index, offsets[slot]);
      const Vec3 n = inward_normal(p, s);
      const auto idx = static_cast<std::size_t>(2 * side_index + slot / 2);
      if (slot % 2 == 0) {
        Emitter& e = c.emitters[idx];
        e.position = p;
        e.facing = n;
        e.aperture_radius = 2.5;
      } else {
        Receiver& r = c.receivers[idx];
        r.position = p;
        r.facing = n;
        r.active_radius = 3.0;
      }
    }
  }
  return c;
}

void validate(const SensorConfig& config) {
  validate(cavity_geometry(config));
  if (!(config.active_area_side > 0.0) || config.active_area_side > config.cavity_side)
    throw_invalid("active area must be positive and fit inside the cavity");
  if (!(config.ambient_level >= 0.0))
    throw_invalid("ambient level must be non-negative");
  if (!(config.noise_sigma >= 0.0))
    throw_invalid("noise sigma must be non-negative");

  const double side = config.cavity_side;
  const double t = config.surface.slab_thickness;
  struct Slot {
    double s;
    bool emitter;
  };
  std::vector<Slot> slots;
  auto check_common = [&](const Vec3& p, const Vec3& facing, const std::string& what) {
    const double s = perimeter_coordinate(p, side);
    if (s < 0.0 || p.x < -kWallTol || p.x > side + kWallTol || p.y < -kWallTol ||
        p.y > side + kWallTol)
      throw_invalid(what + " is not on a cavity wall");
    if (!(p.z > 0.0 && p.z < t))
      throw_invalid(what + " is not inside the slab height");
    if (std::abs(norm(facing) - 1.0) > 1e-9)
      throw_invalid(what + " facing must be a unit vector");
    if (dot(facing, inward_normal(p, side)) <= 0.0)
      throw_invalid(what + " must face into the cavity");
    return s;
  };
  for (int i = 0; i < kComponents; ++i) {
    const Emitter& e = config.emitters[static_cast<std::size_t>(i)];
    const std::string what = "emitter " + std::to_string(i + 1);
    slots.push_back({check_common(e.position, e.facing, what), true});
    if (e.rays_per_state == 0)
      throw_invalid(what + ": rays_per_state must be positive");
    if (!(e.cone_half_angle > 0.0 && e.cone_half_angle <= kPi / 2.0))
      throw_invalid(what + ": cone half-angle must lie in (0, 90] deg");
    if (!(e.aperture_radius >= 0.0) || e.position.z - e.aperture_radius <= 0.0 ||
        e.position.z + e.aperture_radius >= t)
      throw_invalid(what + ": aperture does not fit inside the slab");
  }
  for (int k = 0; k < kComponents; ++k) {
    const Receiver& r = config.receivers[static_cast<std::size_t>(k)];
    const std::string what = "receiver " + std::to_string(k + 1);
    slots.push_back({check_common(r.position, r.facing, what), false});
    if (!(r.active_radius > 0.0))
      throw_invalid(what + ": active radius must be positive");
    if (!(r.acceptance_half_angle > 0.0 && r.acceptance_half_angle <= kPi / 2.0))
      throw_invalid(what + ": acceptance half-angle must lie in (0, 90] deg");
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) { return a.s < b.s; });
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const Slot& a = slots[i];
    const Slot& b = slots[(i + 1) % slots.size()];
    if (a.emitter == b.emitter)
      throw_invalid("emitters and receivers must alternate around the perimeter");
    if (i + 1 < slots.size() && !(b.s > a.s))
      throw_invalid("two components share a perimeter position");
  }
}

CavityGeometry cavity_geometry(const SensorConfig& config) {
  CavityGeometry g;
  g.side = config.cavity_side;
  g.surface = config.surface;
  g.n_inner = config.inner.refractive_index;
  g.n_outer = config.outer.refractive_index;
  g.wall_reflectance = config.wall_reflectance;
  g.bounce_cap = config.bounce_cap;
  return g;
}

double active_area_origin(const SensorConfig& config) {
  return 0.5 * (config.cavity_side - config.active_area_side);
}

double quantize_reading(double value) {
  return std::nearbyint(value / kReadingQuantum) * kReadingQuantum;
}

ScanFans::ScanFans(const SensorConfig& config, std::uint64_t seed) {
  for (int i = 0; i < kComponents; ++i) {
    const Emitter& e = config.emitters[static_cast<std::size_t>(i)];
    std::size_t found = fans_.size();
    for (std::size_t f = 0; f < fans_.size(); ++f) {
      if (fans_[f].size() == e.rays_per_state &&
          fans_[f].cone_half_angle() == e.cone_half_angle &&
          fans_[f].aperture_radius() == e.aperture_radius) {
        found = f;
        break;
      }
    }
    if (found == fans_.size())
      fans_.emplace_back(e.rays_per_state, seed, e.cone_half_angle, e.aperture_radius);
    index_[static_cast<std::size_t>(i)] = found;
  }
}

std::array<double, kComponents * kComponents> scan_transport(const SensorConfig& config,
                                                              const IndenterState& indenter,
                                                              const ScanFans& fans) {
  if (!(indenter.x >= 0.0 && indenter.x <= config.cavity_side && indenter.y >= 0.0 &&
        indenter.y <= config.cavity_side))
    throw_invalid("indenter lies outside the cavity");
  const CavityGeometry geometry = cavity_geometry(config);
  // A hovering tip leaves the slab untouched, so every non-positive depth
  // traces the same scene.
  IndenterState state = indenter;
  if (state.depth <= 0.0)
    state.depth = 0.0;
  std::array<double, kComponents * kComponents> out{};
  for (int j = 0; j < kComponents; ++j) {
    const Emitter& e = config.emitters[static_cast<std::size_t>(j)];
    const TraceResult res = trace_state(fans.fan(j), e, config.receivers, state, geometry);
    for (int k = 0; k < kComponents; ++k)
      out[static_cast<std::size_t>(j * kComponents + k)] =
          res.received[static_cast<std::size_t>(k)] / res.emitted;
  }
  return out;
}

SignalFrame assemble_frame(const SensorConfig& config,
                           const std::array<double, kComponents * kComponents>& transport,
                           std::uint64_t noise_seed) {
  SignalFrame frame;
  const double ambient = quantize_reading(config.ambient_level);
  const bool noisy = config.noise_sigma > 0.0;
  Rng rng(noise_seed);
  for (int j = 0; j < kStates; ++j) {
    for (int k = 0; k < kComponents; ++k) {
      const auto idx = static_cast<std::size_t>(j * kComponents + k);
      double v = j < kComponents ? quantize_reading(transport[idx]) : 0.0;
      v += ambient;
      if (noisy)
        v = std::max(0.0, quantize_reading(v + config.noise_sigma * rng.normal()));
      frame.readings[idx] = v;
    }
  }
  return frame;
}

SignalFrame scan(const SensorConfig& config, const IndenterState& indenter, std::uint64_t seed) {
  validate(config);
  const ScanFans fans(config, derive_seed(config.emission_seed, "fan"));
  return assemble_frame(config, scan_transport(config, indenter, fans),
                        derive_seed(seed, "noise"));
}

FeatureVector extract_features(const SignalFrame& frame) {
  FeatureVector f{};
  for (int j = 0; j < kComponents; ++j)
    for (int k = 0; k < kComponents; ++k)
      f[static_cast<std::size_t>(j * kComponents + k)] =
          frame.readings[static_cast<std::size_t>(j * kComponents + k)] -
          frame.readings[static_cast<std::size_t>((kStates - 1) * kComponents + k)];
  return f;
}

}  // namespace edgetouch
