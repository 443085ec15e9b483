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

#include <filesystem>
#include <map>
#include <string>

#include "edgetouch/sensor.hpp"

namespace edgetouch {

inline constexpr const char* kConfigSchema = "edgetouch-sensor-v1";

/// Ordered key/value view of a document: `key = value` lines, '#' comments,
/// blank lines ignored. Duplicate keys are rejected.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(const std::string& text, const std::string& origin);
KeyValues read_key_values(const std::filesystem::path& path);

/// Canonical text form. Lengths carry a `_mm` suffix, angles `_deg`.
std::string format_config(const SensorConfig& config);
SensorConfig parse_config(const std::string& text, const std::string& origin = "<config>");

SensorConfig load_config(const std::filesystem::path& path);
void save_config(const SensorConfig& config, const std::filesystem::path& path);

/// Sets one field by its file key, e.g. "slab_thickness_mm" or
/// "emitter.3.aperture_radius_mm". The config is not revalidated.
void set_config_value(SensorConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const SensorConfig& config, const std::string& key);

/// 16 hex digits identifying the optical setup. Ambient level and noise are
/// acquisition conditions and are left out, so lit and dark datasets of one
/// sensor share a hash.
std::string config_hash(const SensorConfig& config);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& what);

}  // namespace edgetouch
