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

#include <array>
#include <cstdint>
#include <span>

#include "edgetouch/optics.hpp"
#include "edgetouch/surface.hpp"
#include "edgetouch/transport.hpp"

namespace edgetouch {

inline constexpr int kComponents = 8;
inline constexpr int kStates = 9;
inline constexpr int kReadings = kStates * kComponents;        // 72
inline constexpr int kFeatures = (kStates - 1) * kComponents;  // 64

struct SensorConfig {
  double cavity_side = 32.0;
  double active_area_side = 20.0;
  SurfaceModel surface;
  OpticalMedium inner = kPdms;
  OpticalMedium outer = kAir;
  double wall_reflectance = 0.2;
  int bounce_cap = 8;
  std::array<Emitter, kComponents> emitters;
  std::array<Receiver, kComponents> receivers;
  double ambient_level = 0.0;
  double noise_sigma = 0.0;
  /// Seeds the emission fans. The fans stand for the physical LEDs, so every
  /// scan with this config sees the same emission pattern.
  std::uint64_t emission_seed = 2017;

  /// Two emitters and two receivers per side, alternating counter-clockwise,
  /// centred at slab mid-height. The layout maps onto itself under a quarter
  /// turn about the cavity centre, with emitter i -> i + 2 and receiver
  /// k -> k + 2 (mod 8).
  static SensorConfig default_config();
};

/// Checks geometry, the component counts, wall placement and the
/// alternating perimeter order.
void validate(const SensorConfig& config);

CavityGeometry cavity_geometry(const SensorConfig& config);

/// Lower corner of the centred active area.
double active_area_origin(const SensorConfig& config);

/// Readings grouped by state: readings[(j - 1) * 8 + (k - 1)] = p_j^k.
/// States 1..8 have emitter j on; state 9 is all off.
struct SignalFrame {
  std::array<double, kReadings> readings{};

  double at(int state, int receiver) const {
    return readings[static_cast<std::size_t>((state - 1) * kComponents + (receiver - 1))];
  }
};

using FeatureVector = std::array<double, kFeatures>;

/// Reading resolution. Every reading is rounded to a multiple of this, which
/// makes adding and removing an ambient offset exact.
inline constexpr double kReadingQuantum = 0x1.0p-40;

double quantize_reading(double value);

/// Emission fans for the eight emitters built from one seed. Emitters with
/// identical cone and aperture share the same local pattern.
class ScanFans {
 public:
  ScanFans(const SensorConfig& config, std::uint64_t seed);
  const RayFan& fan(int emitter) const { return fans_[index_[static_cast<std::size_t>(emitter)]]; }

 private:
  std::vector<RayFan> fans_;
  std::array<std::size_t, kComponents> index_{};
};

/// Noise-free transport part of a scan: received fraction per receiver with
/// each emitter on (8 x 8, row = emitter). Depends only on the indenter.
std::array<double, kComponents * kComponents> scan_transport(const SensorConfig& config,
                                                              const IndenterState& indenter,
                                                              const ScanFans& fans);

/// Adds ambient light and optional Gaussian noise to a transport block and
/// quantizes. The noise stream is seeded from `noise_seed`.
SignalFrame assemble_frame(const SensorConfig& config,
                           const std::array<double, kComponents * kComponents>& transport,
                           std::uint64_t noise_seed);

/// Full 9-state scan. Fans come from the config's emission seed, noise from
/// the "noise" substream of `seed`.
SignalFrame scan(const SensorConfig& config, const IndenterState& indenter, std::uint64_t seed);

FeatureVector extract_features(const SignalFrame& frame);

}  // namespace edgetouch
