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

#include "edgetouch/transport.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "edgetouch/error.hpp"
#include "edgetouch/optics.hpp"
#include "edgetouch/random.hpp"
#include "edgetouch/summation.hpp"

namespace edgetouch {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWallTol = 1e-9;
// A segment is considered to have reached the top surface once it is within
// this distance (mm) below it.
constexpr double kHitTol = 1e-12;
// Parameter offset used to leave the top surface after a reflection.
constexpr double kLeaveTol = 1e-6;

enum Wall : int { kWallX0 = 0, kWallX1 = 1, kWallY0 = 2, kWallY1 = 3 };

int wall_of(const Vec3& p, double side) {
  if (std::abs(p.x) < kWallTol)
    return kWallX0;
  if (std::abs(p.x - side) < kWallTol)
    return kWallX1;
  if (std::abs(p.y) < kWallTol)
    return kWallY0;
  if (std::abs(p.y - side) < kWallTol)
    return kWallY1;
  return -1;
}

/// Per-trace state: the resolved indentation profile plus receiver lookup.
class Tracer {
 public:
  Tracer(std::span<const Receiver> receivers, const IndenterState& indenter,
         const CavityGeometry& geometry, TransportMode mode)
      : side_(geometry.side),
        thickness_(geometry.surface.slab_thickness),
        n_inner_(geometry.n_inner),
        n_outer_(geometry.n_outer),
        reflectance_(geometry.wall_reflectance),
        bounce_cap_(geometry.bounce_cap),
        mode_(mode),
        profile_(indenter.depth, geometry.surface),
        cx_(indenter.x),
        cy_(indenter.y),
        receivers_(receivers) {
    for (std::size_t k = 0; k < receivers.size(); ++k) {
      const int w = wall_of(receivers[k].position, side_);
      if (w < 0)
        throw_invalid("receiver " + std::to_string(k) + " is not on a cavity wall");
      by_wall_[w].push_back(static_cast<int>(k));
      cos_accept_.push_back(std::cos(receivers[k].acceptance_half_angle));
    }
    probe_active_ = indenter.depth > 0.0;
    probe_radius_ = geometry.surface.tip_radius;
    probe_center_ = {cx_, cy_, thickness_ - indenter.depth + probe_radius_};
  }

  void trace(const RayFan& fan, const Emitter& emitter, TraceResult& out,
             const PathSink* sink) const;

 private:
  double radius_at(double ox, double oy, const Vec3& d, double t) const {
    const double x = ox + t * d.x;
    const double y = oy + t * d.y;
    return std::sqrt(x * x + y * y);
  }

  std::optional<double> surface_hit(const Vec3& p, const Vec3& d, double t0,
                                    double t_lim) const;
  std::optional<double> probe_hit(const Vec3& p, const Vec3& d) const;

  double side_;
  double thickness_;
  double n_inner_;
  double n_outer_;
  double reflectance_;
  int bounce_cap_;
  TransportMode mode_;
  IndentProfile profile_;
  double cx_;
  double cy_;
  bool probe_active_ = false;
  double probe_radius_ = 0.0;
  Vec3 probe_center_;
  std::span<const Receiver> receivers_;
  std::array<std::vector<int>, 4> by_wall_;
  std::vector<double> cos_accept_;
};

// First parameter in (t0, t_lim] at which the segment reaches the deformed top
// surface z = T + h(r). Along the segment g(t) = z(t) - T - h(r(t)) starts
// negative. The segment is split at its closest approach to the tip axis; on
// each piece r(t) is monotone, which bounds g' from above:
//   receding   (r' >= 0): g' <= dz
//   approaching (r' <= 0): g' <= dz + max h' * |d_xy|
// Stepping by -g / bound therefore never jumps past the first root.
std::optional<double> Tracer::surface_hit(const Vec3& p, const Vec3& d, double t0,
                                          double t_lim) const {
  const double top = thickness_;
  if (profile_.flat() || mode_ == TransportMode::kDirectOnly) {
    if (d.z <= 0.0)
      return std::nullopt;
    const double t = (top - p.z) / d.z;
    return t <= t_lim ? std::optional<double>(t) : std::nullopt;
  }

  bool ends_on_plane = false;
  double t_end = t_lim;
  if (d.z > 0.0) {
    const double t_plane = (top - p.z) / d.z;
    if (t_plane <= t_end) {
      t_end = t_plane;
      ends_on_plane = true;
    }
  }
  if (!(t_end > t0))
    return ends_on_plane ? std::optional<double>(t_end) : std::nullopt;

  const double ox = p.x - cx_;
  const double oy = p.y - cy_;
  const double s2 = d.x * d.x + d.y * d.y;
  const double t_star = s2 > 0.0 ? -(ox * d.x + oy * d.y) / s2 : t0;
  auto g = [&](double t) {
    return p.z + t * d.z - top - profile_.height(radius_at(ox, oy, d, t));
  };

  // Cheap rejection: the segment never rises above the deepest surface point
  // it passes over.
  {
    const double tc = std::clamp(t_star, t0, t_end);
    const double z_max = std::max(p.z + t0 * d.z, p.z + t_end * d.z);
    if (z_max - top - profile_.height(radius_at(ox, oy, d, tc)) < -kHitTol)
      return std::nullopt;
  }

  const double speed_xy = std::sqrt(s2);
  auto march = [&](double a, double b, bool approaching, bool b_on_plane) -> std::optional<double> {
    double t = a;
    double r_t = radius_at(ox, oy, d, t);
    auto [h_t, slope_t] = profile_.height_and_slope(r_t);
    double gt = p.z + t * d.z - top - h_t;
    if (gt >= -kHitTol)
      return t;
    for (int it = 0; it < 256; ++it) {
      double tn;
      if (!approaching) {
        if (d.z <= 0.0)
          return std::nullopt;
        tn = t - gt / d.z;
      } else {
        // Optimistic step from the local slope, then a safe step from the
        // slope bound over that whole stretch.
        const double b0 = d.z + slope_t * speed_xy;
        const double t_probe = b0 > 0.0 ? std::min(t - gt / b0, b) : b;
        const double b1 =
            d.z + profile_.max_slope(radius_at(ox, oy, d, t_probe), r_t) * speed_xy;
        tn = b1 > 0.0 ? std::min(t - gt / b1, t_probe) : t_probe;
      }
      if (tn >= b)
        return b_on_plane ? std::optional<double>(b) : std::nullopt;
      t = tn;
      r_t = radius_at(ox, oy, d, t);
      std::tie(h_t, slope_t) = profile_.height_and_slope(r_t);
      gt = p.z + t * d.z - top - h_t;
      if (gt >= -kHitTol)
        return t;
    }
    // Stalled on a near-tangent approach: scan the rest and bisect.
    const int n = 512;
    double prev = t;
    for (int i = 1; i <= n; ++i) {
      const double ti = t + (b - t) * i / n;
      if (g(ti) >= 0.0) {
        double lo = prev;
        double hi = ti;
        for (int k = 0; k < 80; ++k) {
          const double mid = 0.5 * (lo + hi);
          (g(mid) >= 0.0 ? hi : lo) = mid;
        }
        return hi;
      }
      prev = ti;
    }
    return b_on_plane ? std::optional<double>(b) : std::nullopt;
  };

  if (t_star > t0) {
    const double b = std::min(t_star, t_end);
    if (auto hit = march(t0, b, true, ends_on_plane && b == t_end))
      return hit;
  }
  const double a = std::max(t_star, t0);
  if (t_end > a)
    return march(a, t_end, false, ends_on_plane);
  return std::nullopt;
}

// Entry into the probe: the tip sphere plus its vertical shaft above the
// sphere centre.
std::optional<double> Tracer::probe_hit(const Vec3& p, const Vec3& d) const {
  if (!probe_active_)
    return std::nullopt;
  std::optional<double> best = intersect_sphere(Ray{p, d, 1.0}, probe_center_, probe_radius_);

  const double ox = p.x - probe_center_.x;
  const double oy = p.y - probe_center_.y;
  const double a = d.x * d.x + d.y * d.y;
  const double b = ox * d.x + oy * d.y;
  const double c = ox * ox + oy * oy - probe_radius_ * probe_radius_;
  if (a > 0.0 && c > 0.0 && b < 0.0) {
    const double disc = b * b - a * c;
    if (disc >= 0.0) {
      const double t = c / (-b + std::sqrt(disc));
      if (p.z + t * d.z >= probe_center_.z && (!best || t < *best))
        best = t;
    }
  }
  return best;
}

void Tracer::trace(const RayFan& fan, const Emitter& emitter, TraceResult& out,
                   const PathSink* sink) const {
  const Vec3 forward = emitter.facing;
  const Vec3 up{0.0, 0.0, 1.0};
  const Vec3 side_axis = cross(up, forward);

  std::vector<NeumaierSum> received(receivers_.size());
  NeumaierSum absorbed;
  NeumaierSum escaped;

  const auto samples = fan.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    Vec3 pos = emitter.position + side_axis * s.ap_side + up * s.ap_up;
    Vec3 dir = forward * s.forward + side_axis * s.side + up * s.up;
    double power = 1.0;
    int bounces = 0;
    double t_start = 0.0;
    Termination cause = Termination::kBounceCap;
    int hit_receiver = -1;

    while (true) {
      if (bounces >= bounce_cap_) {
        absorbed.add(power);
        cause = Termination::kBounceCap;
        break;
      }

      double t_wall = kInf;
      int wall = -1;
      if (dir.x > 0.0) {
        t_wall = (side_ - pos.x) / dir.x;
        wall = kWallX1;
      } else if (dir.x < 0.0) {
        t_wall = -pos.x / dir.x;
        wall = kWallX0;
      }
      if (dir.y > 0.0) {
        const double t = (side_ - pos.y) / dir.y;
        if (t < t_wall) {
          t_wall = t;
          wall = kWallY1;
        }
      } else if (dir.y < 0.0) {
        const double t = -pos.y / dir.y;
        if (t < t_wall) {
          t_wall = t;
          wall = kWallY0;
        }
      }
      const double t_bottom = dir.z < 0.0 ? -pos.z / dir.z : kInf;
      const double t_lim = std::min(t_wall, t_bottom);

      const auto t_top = surface_hit(pos, dir, t_start, t_lim);
      const auto t_probe = probe_hit(pos, dir);
      t_start = 0.0;

      if (t_probe && *t_probe <= t_lim && (!t_top || *t_probe <= *t_top + 1e-9)) {
        absorbed.add(power);
        cause = Termination::kTip;
        break;
      }

      if (t_top) {
        const Vec3 hit = pos + dir * *t_top;
        if (mode_ == TransportMode::kDirectOnly) {
          escaped.add(power);
          cause = Termination::kEscaped;
          break;
        }
        Vec3 normal{0.0, 0.0, 1.0};
        if (!profile_.flat()) {
          const double hx = hit.x - cx_;
          const double hy = hit.y - cy_;
          const double r = std::sqrt(hx * hx + hy * hy);
          if (r <= profile_.contact_radius()) {
            // Elastomer in contact with the opaque tip.
            absorbed.add(power);
            cause = Termination::kTip;
            break;
          }
          const double sl = profile_.slope(r) / r;
          normal = normalized(Vec3{-sl * hx, -sl * hy, 1.0});
        }
        const auto outcome = interact_at_interface(Ray{hit, dir, power}, normal, n_inner_, n_outer_);
        if (outcome.event == InterfaceEvent::kTransmitted) {
          escaped.add(power);
          cause = Termination::kEscaped;
          break;
        }
        pos = hit;
        dir = outcome.ray.direction;
        t_start = kLeaveTol;
        ++bounces;
        continue;
      }

      if (t_bottom <= t_wall) {
        absorbed.add(power);
        cause = Termination::kBottom;
        break;
      }

      Vec3 hit = pos + dir * t_wall;
      switch (wall) {
        case kWallX0: hit.x = 0.0; break;
        case kWallX1: hit.x = side_; break;
        case kWallY0: hit.y = 0.0; break;
        default: hit.y = side_; break;
      }
      for (int k : by_wall_[wall]) {
        const Receiver& rc = receivers_[k];
        const Vec3 off = hit - rc.position;
        if (dot(off, off) <= rc.active_radius * rc.active_radius &&
            -dot(dir, rc.facing) >= cos_accept_[k]) {
          hit_receiver = k;
          break;
        }
      }
      if (hit_receiver >= 0) {
        received[hit_receiver].add(power);
        cause = Termination::kReceived;
        break;
      }
      const double kept = power * reflectance_;
      absorbed.add(power - kept);
      power = kept;
      if (power <= 0.0) {
        cause = Termination::kWall;
        break;
      }
      pos = hit;
      if (wall == kWallX0 || wall == kWallX1)
        dir.x = -dir.x;
      else
        dir.y = -dir.y;
      ++bounces;
    }

    if (sink && *sink)
      (*sink)(PathRecord{i, bounces, cause, hit_receiver, power});
  }

  out.received.resize(receivers_.size());
  for (std::size_t k = 0; k < receivers_.size(); ++k)
    out.received[k] = received[k].value();
  out.absorbed = absorbed.value();
  out.escaped = escaped.value();
  out.emitted = static_cast<double>(samples.size());
}

void check_on_wall(const Vec3& p, double side, const char* what) {
  if (wall_of(p, side) < 0)
    throw_invalid(std::string(what) + " is not on a cavity wall");
}

}  // namespace

const char* to_string(Termination cause) {
  switch (cause) {
    case Termination::kReceived: return "received";
    case Termination::kBottom: return "bottom";
    case Termination::kWall: return "wall";
    case Termination::kTip: return "tip";
    case Termination::kEscaped: return "escaped";
    case Termination::kBounceCap: return "bounce_cap";
  }
  return "unknown";
}

double TraceResult::total_received() const {
  NeumaierSum s;
  for (double v : received)
    s.add(v);
  return s.value();
}

void validate(const CavityGeometry& geometry) {
  validate(geometry.surface);
  if (!(geometry.side > 0.0))
    throw_invalid("cavity side must be positive");
  if (!(geometry.n_outer >= 1.0) || !(geometry.n_inner >= geometry.n_outer))
    throw_invalid("refractive indices must satisfy n_inner >= n_outer >= 1");
  if (!(geometry.wall_reflectance >= 0.0 && geometry.wall_reflectance <= 1.0))
    throw_invalid("wall reflectance must lie in [0, 1]");
  if (geometry.bounce_cap < 1)
    throw_invalid("bounce cap must be at least 1");
}

RayFan::RayFan(std::size_t count, std::uint64_t seed, double cone_half_angle,
               double aperture_radius)
    : cone_half_angle_(cone_half_angle), aperture_radius_(aperture_radius) {
  if (count == 0)
    throw_invalid("rays_per_state must be positive");
  if (!(cone_half_angle > 0.0 && cone_half_angle <= kPi / 2.0))
    throw_invalid("cone half-angle must lie in (0, pi/2]");
  if (!(aperture_radius >= 0.0))
    throw_invalid("aperture radius must be non-negative");

  Rng rng(seed);
  const auto grid = static_cast<std::size_t>(std::sqrt(static_cast<double>(count)));
  const std::size_t strata = grid * grid;

  std::vector<std::size_t> pairing(strata);
  std::iota(pairing.begin(), pairing.end(), std::size_t{0});
  std::shuffle(pairing.begin(), pairing.end(), rng.engine());

  const double cos_max = std::cos(cone_half_angle);
  samples_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double u, v, p, q;
    if (i < strata) {
      const double inv = 1.0 / static_cast<double>(grid);
      u = (static_cast<double>(i / grid) + rng.uniform()) * inv;
      v = (static_cast<double>(i % grid) + rng.uniform()) * inv;
      const std::size_t j = pairing[i];
      p = (static_cast<double>(j / grid) + rng.uniform()) * inv;
      q = (static_cast<double>(j % grid) + rng.uniform()) * inv;
    } else {
      u = rng.uniform();
      v = rng.uniform();
      p = rng.uniform();
      q = rng.uniform();
    }
    const double cos_t = 1.0 - u * (1.0 - cos_max);
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * kPi * v;
    const double rho = aperture_radius * std::sqrt(p);
    const double psi = 2.0 * kPi * q;
    samples_.push_back({cos_t, sin_t * std::cos(phi), sin_t * std::sin(phi),
                        rho * std::cos(psi), rho * std::sin(psi)});
  }
}

TraceResult trace_state(const RayFan& fan, const Emitter& emitter,
                        std::span<const Receiver> receivers, const IndenterState& indenter,
                        const CavityGeometry& geometry, const TraceOptions& options) {
  validate(geometry);
  check_on_wall(emitter.position, geometry.side, "emitter");
  const double t = geometry.surface.slab_thickness;
  if (emitter.position.z - fan.aperture_radius() <= 0.0 ||
      emitter.position.z + fan.aperture_radius() >= t)
    throw_invalid("emitter aperture does not fit inside the slab");
  const Tracer tracer(receivers, indenter, geometry, options.mode);
  TraceResult result;
  tracer.trace(fan, emitter, result, options.sink);
  return result;
}

TraceResult trace_state(const Emitter& emitter, std::span<const Receiver> receivers,
                        const IndenterState& indenter, const CavityGeometry& geometry,
                        std::uint64_t seed, const TraceOptions& options) {
  const RayFan fan(emitter.rays_per_state, seed, emitter.cone_half_angle,
                   emitter.aperture_radius);
  return trace_state(fan, emitter, receivers, indenter, geometry, options);
}

DeadbandSeries deadband_profile(double thickness, std::span<const double> depths,
                                const Emitter& emitter, const Receiver& receiver,
                                const CavityGeometry& geometry, std::uint64_t seed,
                                TransportMode mode, const PathSink* sink) {
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (!(depths[i] > depths[i - 1]))
      throw_invalid("deadband depths must be ascending");

  CavityGeometry g = geometry;
  g.surface.slab_thickness = thickness;
  Emitter e = emitter;
  Receiver r = receiver;
  e.position.z = 0.5 * thickness;
  r.position.z = 0.5 * thickness;
  const RayFan fan(e.rays_per_state, seed, e.cone_half_angle, e.aperture_radius);
  const double mx = 0.5 * (e.position.x + r.position.x);
  const double my = 0.5 * (e.position.y + r.position.y);

  DeadbandSeries series;
  series.thickness = thickness;
  for (double depth : depths) {
    const TraceResult res =
        trace_state(fan, e, std::span<const Receiver>(&r, 1), IndenterState{mx, my, depth}, g,
                    TraceOptions{mode, sink});
    series.depths.push_back(depth);
    series.signal.push_back(res.received[0] / res.emitted);
  }
  return series;
}

std::optional<FlatInterval> find_flat_interval(std::span<const double> depths,
                                               std::span<const double> signal,
                                               double min_length, double rel_tol) {
  if (depths.size() != signal.size())
    throw_invalid("depth and signal series differ in length");
  std::vector<double> d;
  std::vector<double> s;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (depths[i] >= 0.0) {
      d.push_back(depths[i]);
      s.push_back(signal[i]);
    }
  }
  if (d.size() < 2)
    return std::nullopt;
  const auto [lo_it, hi_it] = std::minmax_element(s.begin(), s.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0))
    return std::nullopt;
  const double limit = rel_tol * range;
  for (std::size_t i = 0; i < d.size(); ++i) {
    double lo = s[i];
    double hi = s[i];
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      lo = std::min(lo, s[j]);
      hi = std::max(hi, s[j]);
      if (hi - lo >= limit)
        break;
      if (d[j] - d[i] >= min_length - 1e-9)
        return FlatInterval{d[i], d[j]};
    }
  }
  return std::nullopt;
}

}  // namespace edgetouch
