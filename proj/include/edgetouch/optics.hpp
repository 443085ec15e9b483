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

#include <optional>

#include "edgetouch/vec3.hpp"

namespace edgetouch {

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit
  double power = 1.0;
};

struct OpticalMedium {
  double refractive_index = 1.0;
};

inline constexpr OpticalMedium kAir{1.0};
inline constexpr OpticalMedium kPdms{1.4};

/// Critical angle (radians from the normal) for light leaving `n_inner`
/// into `n_outer`. Throws if n_inner < n_outer.
double critical_angle(double n_inner, double n_outer);

enum class InterfaceEvent { kReflected, kTransmitted };

struct InterfaceOutcome {
  InterfaceEvent event;
  Ray ray;  // origin is left at the input origin; the caller owns the hit point
};

/// Binary total-internal-reflection model: beyond the critical angle the ray
/// reflects with full power, otherwise it leaves the inner medium refracted
/// by Snell's law. No partial Fresnel split.
///
/// `normal` may point either way; it is oriented to face the outer medium.
/// A zero normal throws.
InterfaceOutcome interact_at_interface(const Ray& ray, const Vec3& normal, double n_inner,
                                       double n_outer);

/// Smallest positive parameter at which the ray enters the sphere. A ray
/// starting inside, pointing away, or missing returns nullopt.
std::optional<double> intersect_sphere(const Ray& ray, const Vec3& center, double radius);

inline constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace edgetouch
