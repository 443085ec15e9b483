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

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "doctest.h"
#include "edgetouch/error.hpp"
#include "edgetouch/optics.hpp"
#include "oracles.hpp"

using namespace edgetouch;
using namespace edgetouch::testing;

namespace {

Vec3 random_unit(std::mt19937_64& g) {
  std::normal_distribution<double> n;
  return normalized(Vec3{n(g), n(g), n(g)});
}

}  // namespace

TEST_CASE("critical angle of PDMS against air") {
  const double deg = rad_to_deg(critical_angle(1.4, 1.0));
  CHECK(std::abs(deg - 45.58) <= 0.01);
  CHECK(critical_angle(1.0, 1.0) == doctest::Approx(kPi / 2));
  CHECK_THROWS_AS(critical_angle(1.0, 1.4), Error);
}

TEST_CASE("refraction and reflection match the scalar Snell oracle") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> idx(1.0, 2.0);
  int tir = 0;
  for (int i = 0; i < 10000; ++i) {
    const double n_out = idx(g);
    const double n_in = n_out * idx(g);
    const Vec3 d = random_unit(g);
    const Vec3 n = random_unit(g) * (0.5 + idx(g));
    const auto got = interact_at_interface(Ray{{1, 2, 3}, d, 0.7}, n, n_in, n_out);
    const auto want = snell_oracle(d, normalized(n), n_in, n_out);
    REQUIRE((got.event == InterfaceEvent::kReflected) == want.tir);
    tir += want.tir;
    CHECK(norm(got.ray.direction - want.direction) < 1e-9);
    CHECK(got.ray.power == 0.7);
    CHECK(std::abs(norm(got.ray.direction) - 1.0) < 1e-12);
  }
  CHECK(tir > 1000);
  CHECK(tir < 9000);
}

TEST_CASE("rays steeper than the critical angle reflect") {
  const double c = critical_angle(1.4, 1.0);
  for (double off : {-1e-6, 1e-6}) {
    const double a = c + off;
    const Ray r{{0, 0, 0}, {std::sin(a), 0.0, std::cos(a)}};
    const auto out = interact_at_interface(r, {0, 0, 1}, 1.4, 1.0);
    CHECK((out.event == InterfaceEvent::kReflected) == (off > 0));
  }
  const Ray normal_ray{{0, 0, 0}, {0, 0, 1}};
  const auto through = interact_at_interface(normal_ray, {0, 0, -2}, 1.4, 1.0);
  CHECK(through.event == InterfaceEvent::kTransmitted);
  CHECK(norm(through.ray.direction - Vec3{0, 0, 1}) < 1e-15);
  CHECK_THROWS_AS(interact_at_interface(normal_ray, {0, 0, 0}, 1.4, 1.0), Error);
}

TEST_CASE("sphere intersection matches the projection oracle") {
  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> rad(0.1, 5.0);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 o{u(g), u(g), u(g)};
    const Vec3 c{u(g) * 0.3, u(g) * 0.3, u(g) * 0.3};
    // Aim roughly at the sphere half the time so both branches are covered.
    const Vec3 d = (i % 2) ? normalized(c - o + random_unit(g) * rad(g)) : random_unit(g);
    const double r = rad(g);
    const auto got = intersect_sphere(Ray{o, d}, c, r);
    const auto want = sphere_oracle(o, d, c, r);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      ++hits;
      CHECK(std::abs(*got - *want) <= 1e-9 * std::max(1.0, std::abs(*want)));
      CHECK(std::abs(norm(o + d * *got - c) - r) < 1e-9);
    }
  }
  CHECK(hits > 2000);
}

TEST_CASE("sphere intersection edge cases") {
  CHECK_FALSE(intersect_sphere(Ray{{0, 0, 0}, {1, 0, 0}}, {0, 0, 0}, 1.0));  // inside
  CHECK_FALSE(intersect_sphere(Ray{{5, 0, 0}, {1, 0, 0}}, {0, 0, 0}, 1.0));  // away
  CHECK_FALSE(intersect_sphere(Ray{{5, 2, 0}, {-1, 0, 0}}, {0, 0, 0}, 1.0)); // miss
  const auto t = intersect_sphere(Ray{{5, 0, 0}, {-1, 0, 0}}, {0, 0, 0}, 1.0);
  REQUIRE(t);
  CHECK(*t == doctest::Approx(4.0));
  CHECK_THROWS_AS(intersect_sphere(Ray{{5, 0, 0}, {-1, 0, 0}}, {0, 0, 0}, 0.0), Error);
}
