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

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "memprog/device.hpp"

namespace memprog {

struct OracleConfig {
  double tol_g = 0.5;      ///< uS, landing tolerance
  double max_time = 1e6;   ///< ns, search cap on |t|

  void validate(const DeviceParams& p) const {
    if (!(tol_g > 0.0)) {
      throw std::invalid_argument("oracle: tol_g must be > 0");
    }
    if (!(max_time >= p.dt)) {
      throw std::invalid_argument("oracle: max_time must be >= dt");
    }
  }
};

struct OracleResult {
  double t_ns = 0.0;       ///< signed pulse time; positive SET, negative RESET
  double g_landed = 0.0;   ///< uS, noise-free landing conductance for |t_ns|
  bool saturated = false;  ///< target not reached within max_time
};

/// Signed pulse time that lands the noise-free model on g_start + delta_g.
///
/// Durations are quantized to dt. The search brackets the crossing with
/// doubling spans and then bisects; both phases advance a saved intermediate
/// state instead of re-integrating from scratch (noise-free pulses are
/// time-additive). Of the two step counts straddling the target, the one
/// landing closer wins, with a one-step floor so the sign of the result
/// always matches the sign of delta_g.
inline OracleResult oracle_pulse_time(const DeviceParams& p, double g_start, double delta_g,
                                      const OracleConfig& cfg) {
  p.validate();
  cfg.validate(p);
  if (!std::isfinite(g_start) || !std::isfinite(delta_g)) {
    throw std::domain_error("oracle: inputs must be finite");
  }
  const double target = g_start + delta_g;
  if (g_start < p.g_min_nominal || g_start > p.g_max_nominal) {
    throw std::domain_error("oracle: g_start outside nominal range");
  }
  if (target < p.g_min_nominal || target > p.g_max_nominal) {
    throw std::domain_error("oracle: target outside nominal range");
  }

  OracleResult result;
  if (delta_g == 0.0) {
    result.g_landed = g_start;
    return result;
  }

  const double dir = delta_g > 0.0 ? 1.0 : -1.0;
  const double k_dt = (delta_g > 0.0 ? p.k_set : p.k_reset) * p.dt;
  const double range = p.range();
  const auto g_of = [&](double x) { return p.g_min_nominal + x * range; };
  const auto reached = [&](double g) { return dir > 0.0 ? g >= target : g <= target; };
  const auto n_cap = static_cast<std::int64_t>(cfg.max_time / p.dt);

  std::int64_t lo = 0;  // steps taken without reaching the target
  double x_lo = (g_start - p.g_min_nominal) / range;
  std::int64_t hi = -1;
  std::int64_t span = 1;
  while (hi < 0) {
    const std::int64_t next = std::min(lo + span, n_cap);
    double x = x_lo;
    for (std::int64_t i = lo; i < next; ++i) {
      x = detail::noise_free_step(x, k_dt, p.eps_floor, dir);
    }
    if (reached(g_of(x))) {
      hi = next;
    } else {
      lo = next;
      x_lo = x;
      if (lo == n_cap) {
        result.t_ns = dir * static_cast<double>(n_cap) * p.dt;
        result.g_landed = g_of(x);
        result.saturated = true;
        return result;
      }
      span *= 2;
    }
  }

  // bisect (lo, hi] down to the first step count that reaches the target
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    double x = x_lo;
    for (std::int64_t i = lo; i < mid; ++i) {
      x = detail::noise_free_step(x, k_dt, p.eps_floor, dir);
    }
    if (reached(g_of(x))) {
      hi = mid;
    } else {
      lo = mid;
      x_lo = x;
    }
  }

  const double g_prev = g_of(x_lo);
  const double g_hit = g_of(detail::noise_free_step(x_lo, k_dt, p.eps_floor, dir));
  std::int64_t n = hi;
  double g_landed = g_hit;
  if (lo >= 1 && std::abs(g_prev - target) < std::abs(g_hit - target)) {
    n = lo;
    g_landed = g_prev;
  }
  result.t_ns = dir * static_cast<double>(n) * p.dt;
  result.g_landed = g_landed;
  return result;
}

}  // namespace memprog
