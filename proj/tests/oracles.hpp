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

// Slow, straightforward reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "edgetouch/vec3.hpp"

namespace edgetouch::testing {

using Grid = std::vector<std::vector<double>>;

// Snell's law worked in the plane of incidence with explicit angles.
struct ScalarSnell {
  bool tir;
  Vec3 direction;
};

inline ScalarSnell snell_oracle(const Vec3& d, Vec3 n, double n1, double n2) {
  if (dot(d, n) < 0.0)
    n = -n;
  const Vec3 tangential = d - n * dot(d, n);
  const double tlen = norm(tangential);
  const double theta_i = std::atan2(tlen, dot(d, n));
  const Vec3 t = tlen > 0.0 ? tangential * (1.0 / tlen) : Vec3{0.0, 0.0, 0.0};
  const double s = n1 / n2 * std::sin(theta_i);
  if (s > 1.0)
    return {true, n * (-std::cos(theta_i)) + t * std::sin(theta_i)};
  const double theta_t = std::asin(s);
  return {false, n * std::cos(theta_t) + t * std::sin(theta_t)};
}

// Sphere entry by projecting the centre onto the ray line.
inline std::optional<double> sphere_oracle(const Vec3& o, const Vec3& d, const Vec3& c, double r) {
  const Vec3 oc = c - o;
  if (dot(oc, oc) <= r * r)
    return std::nullopt;
  const double tca = dot(oc, d);
  if (tca <= 0.0)
    return std::nullopt;
  const double d2 = dot(oc, oc) - tca * tca;
  if (d2 > r * r)
    return std::nullopt;
  return tca - std::sqrt(r * r - d2);
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
inline Grid invert(Grid a) {
  const std::size_t n = a.size();
  Grid inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col]))
        piv = r;
    if (a[piv][col] == 0.0)
      throw std::runtime_error("singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double p = a[col][col];
    for (std::size_t j = 0; j < n; ++j) {
      a[col][j] /= p;
      inv[col][j] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0.0)
        continue;
      const double f = a[r][col];
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

inline double laplace(const std::vector<double>& u, const std::vector<double>& v, double gamma) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += std::abs(u[i] - v[i]);
  return std::exp(-gamma * s);
}

/// alpha = (K + lambda I)^-1 Y.
inline Grid krr_alpha_oracle(const Grid& x, const Grid& y, double lambda, double gamma) {
  const std::size_t n = x.size();
  Grid k(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      k[i][j] = laplace(x[i], x[j], gamma) + (i == j ? lambda : 0.0);
  const Grid inv = invert(k);
  Grid alpha(n, std::vector<double>(y[0].size(), 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < y[0].size(); ++c)
        alpha[i][c] += inv[i][j] * y[j][c];
  return alpha;
}

inline Grid krr_predict_oracle(const Grid& x, const Grid& alpha, const Grid& q, double gamma) {
  Grid out(q.size(), std::vector<double>(alpha[0].size(), 0.0));
  for (std::size_t i = 0; i < q.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double kv = laplace(q[i], x[j], gamma);
      for (std::size_t c = 0; c < alpha[0].size(); ++c)
        out[i][c] += kv * alpha[j][c];
    }
  return out;
}

/// Optimal value of the SVM dual with augmented bias,
///   max sum(a) - 0.5 a^T Q a,  0 <= a <= C,  Q_ij = y_i y_j (x_i . x_j + 1),
/// by accelerated projected gradient ascent.
inline double svm_dual_oracle(const Grid& x, const std::vector<int>& y, double c) {
  const std::size_t n = x.size();
  Grid q(n, std::vector<double>(n));
  double lip = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double d = 1.0;
      for (std::size_t k = 0; k < x[i].size(); ++k)
        d += x[i][k] * x[j][k];
      q[i][j] = y[i] * y[j] * d;
      row += std::abs(q[i][j]);
    }
    lip = std::max(lip, row);
  }
  auto value = [&](const std::vector<double>& a) {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      lin += a[i];
      for (std::size_t j = 0; j < n; ++j)
        quad += a[i] * q[i][j] * a[j];
    }
    return lin - 0.5 * quad;
  };
  std::vector<double> a(n, 0.0), prev(n, 0.0), z(n, 0.0);
  double t = 1.0;
  for (int it = 0; it < 30000; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double grad = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        grad -= q[i][j] * z[j];
      a[i] = std::clamp(z[i] + grad / lip, 0.0, c);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    for (std::size_t i = 0; i < n; ++i)
      z[i] = a[i] + (t - 1.0) / t_next * (a[i] - prev[i]);
    t = t_next;
    prev = a;
  }
  return value(a);
}

}  // namespace edgetouch::testing
