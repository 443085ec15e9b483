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
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgetouch/sensor.hpp"

namespace edgetouch {

inline constexpr int kSampleFields = 3 + kReadings;  // 75
inline constexpr const char* kDatasetSchema = "edgetouch-dataset-v1";

struct Location {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Location&) const = default;
};

/// Lattice over the centred active area [o, o + active_side]^2, where
/// o = (cavity_side - active_side) / 2, with both edges included. `margin`
/// is the clearance the active area must keep from the cavity walls. The
/// visit order is a seeded shuffle.
std::vector<Location> grid_pattern(double cavity_side, double active_side, double spacing,
                                   double margin, std::uint64_t seed);

/// Uniform locations over the same centred active area.
std::vector<Location> random_pattern(std::size_t count, double cavity_side, double active_side,
                                     std::uint64_t seed);

struct SweepSchedule {
  double hover_start = -10.0;
  double hover_end = -1.0;
  double hover_step = 1.0;
  double contact_start = 0.0;
  double contact_end = 5.0;
  double contact_step = 0.1;
  bool mirrored = true;
  bool hover = true;
  double depth_jitter = 0.0;  // half-width of a uniform depth perturbation, mm

  /// Hover descent, contact descent, then (mirrored) contact ascent without
  /// repeating the deepest point and hover retraction.
  std::vector<double> depths() const;
};

void validate(const SweepSchedule& schedule);

struct Sample {
  double x = 0.0;
  double y = 0.0;
  double d = 0.0;
  std::array<double, kReadings> readings{};

  SignalFrame frame() const;
};

struct DatasetMetadata {
  std::string schema = kDatasetSchema;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string pattern;
  double ambient_level = 0.0;
  double noise_sigma = 0.0;
  std::size_t rays_per_state = 0;
  std::size_t locations = 0;
  std::size_t samples_per_location = 0;
};

struct Dataset {
  DatasetMetadata metadata;
  std::vector<Sample> samples;
};

/// Runs the schedule at every location. Location i draws its emission fans
/// from substream ("location", i) of `seed`; all depths of one location share
/// them, so states that look alike to the tracer are traced once. Sample
/// order follows the pattern order regardless of `threads`.
Dataset collect(const SensorConfig& config, const std::vector<Location>& pattern,
                const std::string& pattern_name, const SweepSchedule& schedule,
                std::uint64_t seed, unsigned threads = 0);

/// One sample per line, 75 numbers in tuple order, after a '#' header.
void write_dataset(const Dataset& dataset, std::ostream& out);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(std::istream& in, const std::string& origin);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace edgetouch
