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

#include "edgetouch/protocols.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "edgetouch/config_io.hpp"
#include "edgetouch/error.hpp"
#include "edgetouch/parallel.hpp"
#include "edgetouch/random.hpp"

namespace edgetouch {
namespace {

// Depths are generated as integer multiples of the step and snapped to the
// nearest nanometre so that 0.1 * 3 prints as 0.3.
double snap(double v) { return std::nearbyint(v * 1e9) / 1e9; }

std::size_t steps_between(double start, double end, double step, const char* what) {
  const double n = (end - start) / step;
  const double rounded = std::nearbyint(n);
  if (std::abs(n - rounded) > 1e-6)
    throw_invalid(std::string(what) + " range is not a whole number of steps");
  return static_cast<std::size_t>(rounded);
}

bool inside_area(const Location& p, double lo, double hi) {
  constexpr double kTol = 1e-9;
  return p.x >= lo - kTol && p.x <= hi + kTol && p.y >= lo - kTol && p.y <= hi + kTol;
}

}  // namespace

std::vector<Location> grid_pattern(double cavity_side, double active_side, double spacing,
                                   double margin, std::uint64_t seed) {
  if (!(spacing > 0.0))
    throw_invalid("grid spacing must be positive");
  if (!(active_side >= 0.0) || !(margin >= 0.0))
    throw_invalid("active side and margin must be non-negative");
  const double origin = 0.5 * (cavity_side - active_side);
  if (origin < margin - 1e-12)
    throw_invalid("active area does not keep the requested margin from the walls");
  const auto n = static_cast<std::size_t>(std::floor(active_side / spacing + 1e-9)) + 1;
  std::vector<Location> points;
  points.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      points.push_back({snap(origin + static_cast<double>(i) * spacing),
                        snap(origin + static_cast<double>(j) * spacing)});
  if (points.empty())
    throw_invalid("grid pattern is empty");
  Rng rng(derive_seed(seed, "pattern"));
  std::shuffle(points.begin(), points.end(), rng.engine());
  return points;
}

std::vector<Location> random_pattern(std::size_t count, double cavity_side, double active_side,
                                     std::uint64_t seed) {
  if (count == 0)
    throw_invalid("random pattern needs at least one location");
  if (!(active_side >= 0.0) || active_side > cavity_side)
    throw_invalid("active area must fit inside the cavity");
  const double origin = 0.5 * (cavity_side - active_side);
  Rng rng(derive_seed(seed, "pattern"));
  std::vector<Location> points(count);
  for (auto& p : points) {
    p.x = origin + active_side * rng.uniform();
    p.y = origin + active_side * rng.uniform();
  }
  return points;
}

void validate(const SweepSchedule& s) {
  if (s.hover) {
    if (!(s.hover_step > 0.0))
      throw_invalid("hover step must be positive");
    if (!(s.hover_start <= s.hover_end) || !(s.hover_end < 0.0))
      throw_invalid("hover depths must be ordered and negative");
  }
  if (!(s.contact_step > 0.0))
    throw_invalid("contact step must be positive");
  if (!(s.contact_start <= s.contact_end) || s.contact_start < 0.0)
    throw_invalid("contact depths must be ordered and non-negative");
  if (!(s.depth_jitter >= 0.0))
    throw_invalid("depth jitter must be non-negative");
}

std::vector<double> SweepSchedule::depths() const {
  validate(*this);
  std::vector<double> hover_pts;
  if (hover) {
    const std::size_t n = steps_between(hover_start, hover_end, hover_step, "hover");
    for (std::size_t i = 0; i <= n; ++i)
      hover_pts.push_back(snap(hover_start + static_cast<double>(i) * hover_step));
  }
  std::vector<double> contact;
  const std::size_t m = steps_between(contact_start, contact_end, contact_step, "contact");
  for (std::size_t i = 0; i <= m; ++i)
    contact.push_back(snap(contact_start + static_cast<double>(i) * contact_step));

  std::vector<double> out = hover_pts;
  out.insert(out.end(), contact.begin(), contact.end());
  if (mirrored) {
    out.insert(out.end(), contact.rbegin() + 1, contact.rend());
    out.insert(out.end(), hover_pts.rbegin(), hover_pts.rend());
  }
  return out;
}

SignalFrame Sample::frame() const {
  SignalFrame f;
  f.readings = readings;
  return f;
}

Dataset collect(const SensorConfig& config, const std::vector<Location>& pattern,
                const std::string& pattern_name, const SweepSchedule& schedule,
                std::uint64_t seed, unsigned threads) {
  validate(config);
  if (pattern.empty())
    throw_invalid("pattern has no locations");
  const double lo = active_area_origin(config);
  const double hi = lo + config.active_area_side;
  for (const auto& p : pattern)
    if (!inside_area(p, lo, hi))
      throw_invalid("location (" + format_double(p.x) + ", " + format_double(p.y) +
                    ") lies outside the active area");
  const std::vector<double> depths = schedule.depths();
  for (double d : depths)
    if (d + schedule.depth_jitter > config.surface.slab_thickness)
      throw_invalid("schedule depth exceeds slab thickness");

  const std::size_t per = depths.size();
  Dataset ds;
  ds.metadata.seed = seed;
  ds.metadata.config_hash = config_hash(config);
  ds.metadata.pattern = pattern_name;
  ds.metadata.ambient_level = config.ambient_level;
  ds.metadata.noise_sigma = config.noise_sigma;
  ds.metadata.rays_per_state = config.emitters[0].rays_per_state;
  ds.metadata.locations = pattern.size();
  ds.metadata.samples_per_location = per;
  ds.samples.resize(pattern.size() * per);

  const ScanFans fans(config, derive_seed(config.emission_seed, "fan"));
  parallel_for(pattern.size(), threads, [&](std::size_t i) {
    const std::uint64_t loc_seed = derive_seed(seed, "location", i);
    Rng jitter(derive_seed(loc_seed, "jitter"));
    std::map<double, std::array<double, kComponents * kComponents>> traced;
    for (std::size_t s = 0; s < per; ++s) {
      double d = depths[s];
      if (schedule.depth_jitter > 0.0)
        d += schedule.depth_jitter * (2.0 * jitter.uniform() - 1.0);
      const double key = std::max(d, 0.0);
      auto it = traced.find(key);
      if (it == traced.end())
        it = traced.emplace(key, scan_transport(config, {pattern[i].x, pattern[i].y, d}, fans))
                 .first;
      const SignalFrame frame = assemble_frame(config, it->second, derive_seed(loc_seed, "noise", s));
      Sample& out = ds.samples[i * per + s];
      out.x = pattern[i].x;
      out.y = pattern[i].y;
      out.d = d;
      out.readings = frame.readings;
    }
  });
  return ds;
}

void write_dataset(const Dataset& ds, std::ostream& out) {
  const auto& m = ds.metadata;
  out << "# schema = " << m.schema << "\n"
      << "# seed = " << m.seed << "\n"
      << "# config_hash = " << m.config_hash << "\n"
      << "# pattern = " << m.pattern << "\n"
      << "# ambient_level = " << format_double(m.ambient_level) << "\n"
      << "# noise_sigma = " << format_double(m.noise_sigma) << "\n"
      << "# rays_per_state = " << m.rays_per_state << "\n"
      << "# locations = " << m.locations << "\n"
      << "# samples_per_location = " << m.samples_per_location << "\n"
      << "# fields = x_mm y_mm d_mm p[state][receiver] (state-major, 9 x 8)\n";
  std::string line;
  char buf[32];
  for (const Sample& s : ds.samples) {
    line.clear();
    auto put = [&](double v) {
      if (!line.empty())
        line.push_back(' ');
      const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
      line.append(buf, p);
    };
    put(s.x);
    put(s.y);
    put(s.d);
    for (double v : s.readings)
      put(v);
    line.push_back('\n');
    out << line;
  }
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw_data("cannot write dataset: " + path.string());
  write_dataset(dataset, out);
  out.flush();
  if (!out)
    throw_data("write failed: " + path.string());
}

Dataset read_dataset(std::istream& in, const std::string& origin) {
  Dataset ds;
  std::string header;
  std::string line;
  int line_no = 0;
  bool in_header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    const std::string where = origin + ":" + std::to_string(line_no);
    if (line[0] == '#') {
      if (!in_header)
        throw_data(where + ": header line after data");
      header += line.substr(1) + "\n";
      continue;
    }
    in_header = false;
    Sample s;
    double values[kSampleFields];
    int count = 0;
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && (*p == ' ' || *p == '\t'))
        ++p;
      if (p == end)
        break;
      if (count == kSampleFields)
        throw_data(where + ": more than 75 fields");
      const auto [q, ec] = std::from_chars(p, end, values[count]);
      if (ec != std::errc() || (q < end && *q != ' ' && *q != '\t'))
        throw_data(where + ": malformed number");
      ++count;
      p = q;
    }
    if (count != kSampleFields)
      throw_data(where + ": expected 75 fields, found " + std::to_string(count));
    s.x = values[0];
    s.y = values[1];
    s.d = values[2];
    std::copy(values + 3, values + kSampleFields, s.readings.begin());
    ds.samples.push_back(s);
  }

  const KeyValues kv = parse_key_values(header, origin);
  auto get = [&](const char* key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end())
      throw_data(origin + ": header lacks '" + key + "'");
    return it->second;
  };
  auto get_count = [&](const char* key) {
    const std::string& v = get(key);
    std::uint64_t n = 0;
    const auto [q, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc() || q != v.data() + v.size())
      throw_data(origin + ": header '" + key + "' is not an unsigned integer");
    return n;
  };
  auto& m = ds.metadata;
  m.schema = get("schema");
  if (m.schema != kDatasetSchema)
    throw_data(origin + ": unsupported dataset schema '" + m.schema + "'");
  m.seed = get_count("seed");
  m.config_hash = get("config_hash");
  m.pattern = get("pattern");
  m.ambient_level = parse_double(get("ambient_level"), origin + ": ambient_level");
  m.noise_sigma = parse_double(get("noise_sigma"), origin + ": noise_sigma");
  m.rays_per_state = get_count("rays_per_state");
  m.locations = get_count("locations");
  m.samples_per_location = get_count("samples_per_location");
  if (m.locations * m.samples_per_location != ds.samples.size())
    throw_data(origin + ": header promises " +
               std::to_string(m.locations * m.samples_per_location) + " samples, file has " +
               std::to_string(ds.samples.size()));
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw_data("cannot open dataset: " + path.string());
  return read_dataset(in, path.string());
}

}  // namespace edgetouch
