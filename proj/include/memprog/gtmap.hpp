/*
 * Copyright 2026 The memprog Authors
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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "memprog/dataset.hpp"

namespace memprog {

namespace detail {

/// Moving average with truncated windows: out[i] is the mean of the input
/// over [max(0, i-h), min(n-1, i+h)], h = (kernel-1)/2. No padding values are
/// invented at the edges. Computed with a prefix sum; kernel 1 degenerates to
/// a copy.
inline void moving_average(std::span<const float> in, int kernel, std::vector<double>& out) {
  const auto n = static_cast<std::int64_t>(in.size());
  out.resize(in.size());
  if (kernel <= 1) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  const std::int64_t h = (kernel - 1) / 2;
  std::vector<double> prefix(in.size() + 1, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    prefix[static_cast<std::size_t>(i + 1)] =
        prefix[static_cast<std::size_t>(i)] + static_cast<double>(in[static_cast<std::size_t>(i)]);
  }
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t lo = std::max<std::int64_t>(0, i - h);
    const std::int64_t hi = std::min<std::int64_t>(n - 1, i + h);
    out[static_cast<std::size_t>(i)] =
        (prefix[static_cast<std::size_t>(hi + 1)] - prefix[static_cast<std::size_t>(lo)]) /
        static_cast<double>(hi - lo + 1);
  }
}

/// Piecewise-linear lookup of the (smoothed) history at normalized time
/// t_norm. The grid is uniform in elapsed time; `sign` selects which signed
/// half-axis the history lives on. Outside the recorded range the nearest end
/// value is returned.
inline double pwl_value_norm(std::span<const double> g, double sign, double dt,
                             const NormConstants& norm, double t_norm) {
  const auto n = static_cast<std::int64_t>(g.size());
  const double t_ns = denormalize_t(t_norm, norm);
  const double elapsed = sign * t_ns;  // >= 0 when t lies on the recorded side
  if (std::isnan(elapsed)) {
    return elapsed;  // propagate, so diverged training aborts instead of masking
  }
  if (elapsed <= 0.0) {
    return normalize_g(g[0], norm);
  }
  const double last = static_cast<double>(n - 1) * dt;
  if (elapsed >= last) {
    return normalize_g(g[static_cast<std::size_t>(n - 1)], norm);
  }
  const auto j = static_cast<std::int64_t>(elapsed / dt);
  const double frac = elapsed / dt - static_cast<double>(j);
  const double a = g[static_cast<std::size_t>(j)];
  const double b = g[static_cast<std::size_t>(j + 1)];
  return normalize_g(a + frac * (b - a), norm);
}

/// Slope of the piecewise-linear map in normalized units, clamped into [0, 1].
/// Nodes take the right-hand segment. Outside the recorded range (including
/// its far node) the gradient is exactly 1, which pulls stray predictions
/// back toward the recorded region under gradient descent.
inline double pwl_grad_norm(std::span<const double> g, double sign, double dt,
                            const NormConstants& norm, double t_norm) {
  const auto n = static_cast<std::int64_t>(g.size());
  const double t_ns = denormalize_t(t_norm, norm);
  const double elapsed = sign * t_ns;
  const double last = static_cast<double>(n - 1) * dt;
  if (!(elapsed >= 0.0) || elapsed >= last || n < 2) {
    return 1.0;  // out of range (or NaN input); the fixed slope points back inward
  }
  const auto j = static_cast<std::int64_t>(elapsed / dt);
  const double dg_norm =
      normalize_g(g[static_cast<std::size_t>(j + 1)] - g[static_cast<std::size_t>(j)], norm);
  // signed-time width of one grid cell (negative for RESET histories, whose
  // elapsed time runs against the signed axis)
  const double dt_norm = normalize_t(sign * dt, norm) - normalize_t(0.0, norm);
  const double slope = dg_norm / dt_norm;
  return std::clamp(slope, 0.0, 1.0);
}

}  // namespace detail

/// A sample's recorded history smoothed by a centered moving average.
struct SmoothedHistory {
  const Sample* sample = nullptr;  ///< source of the time grid (non-owning)
  int kernel = 1;
  double dt = 10.0;                ///< ns, grid spacing
  std::vector<double> g_smooth;    ///< uS, same length as the recorded history
};

inline SmoothedHistory smooth_history(const Sample& s, int kernel, double dt) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw std::invalid_argument("gtmap: smoothing kernel must be odd and >= 1");
  }
  if (s.history_g.empty()) {
    throw std::invalid_argument("gtmap: history is empty");
  }
  SmoothedHistory sh;
  sh.sample = &s;
  sh.kernel = kernel;
  sh.dt = dt;
  detail::moving_average(s.history_g, kernel, sh.g_smooth);
  return sh;
}

/// Map a normalized pulse time to a normalized conductance through the
/// smoothed piecewise-linear history.
inline double map_t_to_g(const SmoothedHistory& sh, double t_norm, const NormConstants& norm) {
  return detail::pwl_value_norm(sh.g_smooth, sh.sample->sign(), sh.dt, norm, t_norm);
}

/// dG/dt of map_t_to_g in normalized units: the local secant slope clamped to
/// [0, 1] inside the recorded range, exactly 1 outside it.
inline double map_t_to_g_grad(const SmoothedHistory& sh, double t_norm, const NormConstants& norm) {
  return detail::pwl_grad_norm(sh.g_smooth, sh.sample->sign(), sh.dt, norm, t_norm);
}

}  // namespace memprog
