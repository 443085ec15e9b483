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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "edgetouch/surface.hpp"
#include "edgetouch/vec3.hpp"

namespace edgetouch {

/// Edge-mounted LED. Rays leave a disc of `aperture_radius` in the wall
/// plane, uniformly in solid angle inside the cone around `facing`.
struct Emitter {
  Vec3 position;
  Vec3 facing;
  double cone_half_angle = 1.0471975511965976;  // 60 deg
  double aperture_radius = 0.0;
  std::size_t rays_per_state = 50000;
};

/// Edge-mounted photodiode: a disc of `active_radius` lying in its wall.
struct Receiver {
  Vec3 position;
  Vec3 facing;
  double active_radius = 1.5;
  double acceptance_half_angle = 1.3962634015954636;  // 80 deg
};

/// Everything the tracer needs about the cavity besides the components.
struct CavityGeometry {
  double side = 32.0;
  SurfaceModel surface;
  double n_inner = 1.4;
  double n_outer = 1.0;
  double wall_reflectance = 0.2;
  int bounce_cap = 8;
};

void validate(const CavityGeometry& geometry);

enum class TransportMode {
  kFull,
  /// Diagnostic: the top surface absorbs everything (no reflection paths) and
  /// only the submerged probe body interacts with the light.
  kDirectOnly,
};

enum class Termination : std::uint8_t {
  kReceived,
  kBottom,
  kWall,
  kTip,
  kEscaped,
  kBounceCap,
};

const char* to_string(Termination cause);

struct PathRecord {
  std::size_t ray = 0;
  int bounces = 0;
  Termination cause = Termination::kBottom;
  int receiver = -1;     // index into the receiver list when received
  double power = 0.0;    // power carried at termination
};

using PathSink = std::function<void(const PathRecord&)>;

struct TraceResult {
  std::vector<double> received;
  double absorbed = 0.0;
  double escaped = 0.0;
  double emitted = 0.0;

  double total_received() const;
};

/// Stratified emission pattern in the emitter's local frame. Directions come
/// from a jittered grid over (cos theta, phi); aperture points from a second
/// jittered grid paired by a seeded permutation. Leftover rays beyond the
/// largest square grid are drawn uniformly.
class RayFan {
 public:
  struct Sample {
    double forward;  // along facing
    double side;     // along up x facing
    double up;       // along +z
    double ap_side;  // aperture offset, mm
    double ap_up;
  };

  RayFan(std::size_t count, std::uint64_t seed, double cone_half_angle, double aperture_radius);

  std::span<const Sample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double cone_half_angle() const { return cone_half_angle_; }
  double aperture_radius() const { return aperture_radius_; }

 private:
  std::vector<Sample> samples_;
  double cone_half_angle_;
  double aperture_radius_;
};

struct TraceOptions {
  TransportMode mode = TransportMode::kFull;
  const PathSink* sink = nullptr;
};

/// Traces one illumination state: every ray of the emitter's fan is followed
/// through the slab until it is received, absorbed, escapes, or hits the
/// bounce cap (remaining power booked as absorbed).
TraceResult trace_state(const Emitter& emitter, std::span<const Receiver> receivers,
                        const IndenterState& indenter, const CavityGeometry& geometry,
                        std::uint64_t seed, const TraceOptions& options = {});

/// Same, with a prebuilt fan (shared across emitters and depths of one scan).
TraceResult trace_state(const RayFan& fan, const Emitter& emitter,
                        std::span<const Receiver> receivers, const IndenterState& indenter,
                        const CavityGeometry& geometry, const TraceOptions& options = {});

struct DeadbandSeries {
  double thickness = 0.0;
  std::vector<double> depths;
  std::vector<double> signal;  // received fraction of emitted power
};

/// Signal-vs-depth for one opposed pair at the given slab thickness. Both
/// components are re-centred at mid-height and the probe descends at the
/// midpoint of the pair. Every depth reuses one emission fan.
DeadbandSeries deadband_profile(double thickness, std::span<const double> depths,
                                const Emitter& emitter, const Receiver& receiver,
                                const CavityGeometry& geometry, std::uint64_t seed,
                                TransportMode mode = TransportMode::kFull,
                                const PathSink* sink = nullptr);

struct FlatInterval {
  double start = 0.0;
  double end = 0.0;
};

/// First window of contact depths (>= 0), at least `min_length` long, over
/// which the signal moves by less than `rel_tol` of its contact-depth range.
std::optional<FlatInterval> find_flat_interval(std::span<const double> depths,
                                               std::span<const double> signal,
                                               double min_length = 1.0,
                                               double rel_tol = 0.02);

}  // namespace edgetouch
