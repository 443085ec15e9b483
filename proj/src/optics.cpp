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

#include "edgetouch/optics.hpp"

#include <cmath>

#include "edgetouch/error.hpp"

namespace edgetouch {

double critical_angle(double n_inner, double n_outer) {
  if (!(n_outer >= 1.0))
    throw_invalid("refractive index must be >= 1");
  if (n_inner < n_outer)
    throw_invalid("no total internal reflection possible (n_inner < n_outer)");
  return std::asin(n_outer / n_inner);
}

InterfaceOutcome interact_at_interface(const Ray& ray, const Vec3& normal, double n_inner,
                                       double n_outer) {
  const double len = norm(normal);
  if (!(len > 1e-12))
    throw_invalid("degenerate interface normal");
  Vec3 n = normal * (1.0 / len);
  double cos_i = dot(ray.direction, n);
  if (cos_i < 0.0) {
    n = -n;
    cos_i = -cos_i;
  }

  const double eta = n_inner / n_outer;
  const double sin2_t = eta * eta * (1.0 - cos_i * cos_i);
  if (sin2_t > 1.0) {
    Ray out = ray;
    out.direction = ray.direction - n * (2.0 * cos_i);
    return {InterfaceEvent::kReflected, out};
  }

  const double cos_t = std::sqrt(1.0 - sin2_t);
  Ray out = ray;
  out.direction = ray.direction * eta + n * (cos_t - eta * cos_i);
  return {InterfaceEvent::kTransmitted, out};
}

std::optional<double> intersect_sphere(const Ray& ray, const Vec3& center, double radius) {
  if (!(radius > 0.0))
    throw_invalid("sphere radius must be positive");
  const Vec3 oc = ray.origin - center;
  const double b = dot(oc, ray.direction);
  const double c = dot(oc, oc) - radius * radius;
  if (c <= 0.0 || b >= 0.0)
    return std::nullopt;  // inside, or heading away
  const double disc = b * b - c;
  if (disc < 0.0)
    return std::nullopt;
  // Numerically stable near root: c / (-b + sqrt(disc)).
  return c / (-b + std::sqrt(disc));
}

}  // namespace edgetouch
