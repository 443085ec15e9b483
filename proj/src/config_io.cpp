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

#include "edgetouch/config_io.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "edgetouch/error.hpp"

namespace edgetouch {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_vec(const Vec3& v) {
  return format_double(v.x) + " " + format_double(v.y) + " " + format_double(v.z);
}

Vec3 parse_vec(const std::string& text, const std::string& what) {
  std::istringstream ss(text);
  std::string a, b, c, extra;
  if (!(ss >> a >> b >> c) || (ss >> extra))
    throw_data(what + ": expected three numbers, got '" + text + "'");
  return {parse_double(a, what), parse_double(b, what), parse_double(c, what)};
}

long parse_int(const std::string& text, const std::string& what) {
  long v = 0;
  const auto* end = text.data() + text.size();
  const auto [p, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || p != end)
    throw_data(what + ": expected an integer, got '" + text + "'");
  return v;
}

struct Field {
  std::function<std::string(const SensorConfig&)> get;
  std::function<void(SensorConfig&, const std::string&, const std::string&)> set;
};

// Keys in canonical order.
std::vector<std::pair<std::string, Field>> fields() {
  std::vector<std::pair<std::string, Field>> f;
  auto scalar = [&](const std::string& key, auto member) {
    f.push_back({key,
                 {[member](const SensorConfig& c) { return format_double(member(c)); },
                  [member](SensorConfig& c, const std::string& v, const std::string& k) {
                    member(c) = parse_double(v, k);
                  }}});
  };
  auto angle = [&](const std::string& key, auto member) {
    f.push_back({key,
                 {[member](const SensorConfig& c) {
                    return format_double(rad_to_deg(member(c)));
                  },
                  [member](SensorConfig& c, const std::string& v, const std::string& k) {
                    member(c) = deg_to_rad(parse_double(v, k));
                  }}});
  };
  auto vec = [&](const std::string& key, auto member) {
    f.push_back({key,
                 {[member](const SensorConfig& c) { return format_vec(member(c)); },
                  [member](SensorConfig& c, const std::string& v, const std::string& k) {
                    member(c) = parse_vec(v, k);
                  }}});
  };

  scalar("cavity_side_mm", [](auto& c) -> auto& { return c.cavity_side; });
  scalar("active_area_side_mm", [](auto& c) -> auto& { return c.active_area_side; });
  scalar("slab_thickness_mm", [](auto& c) -> auto& { return c.surface.slab_thickness; });
  scalar("tip_radius_mm", [](auto& c) -> auto& { return c.surface.tip_radius; });
  scalar("decay_length_mm", [](auto& c) -> auto& { return c.surface.decay_length; });
  scalar("n_inner", [](auto& c) -> auto& { return c.inner.refractive_index; });
  scalar("n_outer", [](auto& c) -> auto& { return c.outer.refractive_index; });
  scalar("wall_reflectance", [](auto& c) -> auto& { return c.wall_reflectance; });
  f.push_back({"bounce_cap",
               {[](const SensorConfig& c) { return std::to_string(c.bounce_cap); },
                [](SensorConfig& c, const std::string& v, const std::string& k) {
                  c.bounce_cap = static_cast<int>(parse_int(v, k));
                }}});
  f.push_back({"emission_seed",
               {[](const SensorConfig& c) { return std::to_string(c.emission_seed); },
                [](SensorConfig& c, const std::string& v, const std::string& k) {
                  std::uint64_t seed = 0;
                  const auto* end = v.data() + v.size();
                  const auto [p, ec] = std::from_chars(v.data(), end, seed);
                  if (ec != std::errc() || p != end)
                    throw_data(k + ": expected an unsigned integer, got '" + v + "'");
                  c.emission_seed = seed;
                }}});
  scalar("ambient_level", [](auto& c) -> auto& { return c.ambient_level; });
  scalar("noise_sigma", [](auto& c) -> auto& { return c.noise_sigma; });

  for (std::size_t i = 0; i < kComponents; ++i) {
    const std::string p = "emitter." + std::to_string(i + 1) + ".";
    vec(p + "position_mm", [i](auto& c) -> auto& { return c.emitters[i].position; });
    vec(p + "facing", [i](auto& c) -> auto& { return c.emitters[i].facing; });
    angle(p + "cone_half_angle_deg",
          [i](auto& c) -> auto& { return c.emitters[i].cone_half_angle; });
    scalar(p + "aperture_radius_mm",
           [i](auto& c) -> auto& { return c.emitters[i].aperture_radius; });
    f.push_back({p + "rays_per_state",
                 {[i](const SensorConfig& c) { return std::to_string(c.emitters[i].rays_per_state); },
                  [i](SensorConfig& c, const std::string& v, const std::string& k) {
                    const long n = parse_int(v, k);
                    if (n <= 0)
                      throw_data(k + ": must be positive");
                    c.emitters[i].rays_per_state = static_cast<std::size_t>(n);
                  }}});
  }
  for (std::size_t k = 0; k < kComponents; ++k) {
    const std::string p = "receiver." + std::to_string(k + 1) + ".";
    vec(p + "position_mm", [k](auto& c) -> auto& { return c.receivers[k].position; });
    vec(p + "facing", [k](auto& c) -> auto& { return c.receivers[k].facing; });
    scalar(p + "active_radius_mm",
           [k](auto& c) -> auto& { return c.receivers[k].active_radius; });
    angle(p + "acceptance_half_angle_deg",
          [k](auto& c) -> auto& { return c.receivers[k].acceptance_half_angle; });
  }
  return f;
}

const std::vector<std::pair<std::string, Field>>& field_table() {
  static const auto table = fields();
  return table;
}

const Field& find_field(const std::string& key) {
  for (const auto& [k, f] : field_table())
    if (k == key)
      return f;
  throw_data("unknown config key '" + key + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto* end = t.data() + t.size();
  const auto [p, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || p != end)
    throw_data(what + ": expected a number, got '" + text + "'");
  return v;
}

KeyValues parse_key_values(const std::string& text, const std::string& origin) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string::npos)
      throw_data(where + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw_data(where + ": empty key");
    if (!kv.emplace(key, value).second)
      throw_data(where + ": duplicate key '" + key + "'");
  }
  return kv;
}

KeyValues read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw_data("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str(), path.string());
}

std::string format_config(const SensorConfig& config) {
  std::ostringstream out;
  out << "schema = " << kConfigSchema << "\n";
  for (const auto& [key, field] : field_table())
    out << key << " = " << field.get(config) << "\n";
  return out.str();
}

SensorConfig parse_config(const std::string& text, const std::string& origin) {
  const KeyValues kv = parse_key_values(text, origin);
  const auto schema = kv.find("schema");
  if (schema == kv.end() || schema->second != kConfigSchema)
    throw_data(origin + ": missing or unsupported schema (expected " + kConfigSchema + ")");
  // Unspecified keys keep their defaults.
  SensorConfig config = SensorConfig::default_config();
  for (const auto& [key, value] : kv) {
    if (key == "schema")
      continue;
    find_field(key).set(config, value, origin + ": " + key);
  }
  try {
    validate(config);
  } catch (const Error& e) {
    throw_data(origin + ": " + e.what());
  }
  return config;
}

SensorConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw_data("cannot open sensor config: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

void save_config(const SensorConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw_data("cannot write " + path.string());
  out << "# edgetouch sensor configuration\n" << format_config(config);
  if (!out)
    throw_data("write failed: " + path.string());
}

void set_config_value(SensorConfig& config, const std::string& key, const std::string& value) {
  find_field(key).set(config, trim(value), key);
}

std::string get_config_value(const SensorConfig& config, const std::string& key) {
  return find_field(key).get(config);
}

std::string config_hash(const SensorConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [key, field] : field_table()) {
    if (key == "ambient_level" || key == "noise_sigma")
      continue;
    mix(key);
    mix("=");
    mix(field.get(config));
    mix("\n");
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[h & 0xf];
    h >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

}  // namespace edgetouch
