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
#include <stdexcept>
#include <vector>

#include "memprog/rng.hpp"

namespace memprog {

enum class Polarity { kSet, kReset };

inline double polarity_sign(Polarity p) { return p == Polarity::kSet ? 1.0 : -1.0; }

/// Polarity needed to move the conductance by delta_g (SET raises G).
inline Polarity polarity_for_delta(double delta_g) {
  return delta_g >= 0.0 ? Polarity::kSet : Polarity::kReset;
}

/// Phenomenological switching-device parameters.
///
/// The device is a clamped-logistic rate model: an internal variable
/// x in [0,1] with dx/dt = +/- rho * k * (x + eps) * (1 - x + eps) and
/// G = g_min_t + x * (g_max_t - g_min_t). The rate term self-accelerates away
/// from the bounds and saturates at them, which produces S-shaped switching
/// curves and slow response near g_min/g_max. Cycle-to-cycle variation enters
/// as bounded random walks on the rate multiplier rho (filament-geometry
/// surrogate) and on the conductance bounds (vacancy-boundary surrogate).
struct DeviceParams {
  double g_min_nominal = 50.0;   ///< uS, nominal lower bound
  double g_max_nominal = 400.0;  ///< uS, nominal upper bound
  double k_set = 1.2784e-4;      ///< 1/ns; full SET transit (x 0.01->0.99) in ~6000 steps
  double k_reset = 2.5568e-4;    ///< 1/ns; RESET switches roughly twice as fast
  double eps_floor = 0.01;       ///< boundary leak, keeps x=0 and x=1 non-absorbing
  double sigma_rate = 2.0e-3;    ///< per-step std of the rho random walk
  double sigma_bound = 0.7;      ///< uS, per-step std of each bound's random walk
  double dt = 10.0;              ///< ns, pulse/integration quantum
  double v_set = 1.0;            ///< V, label only; the model is polarity-driven
  double v_reset = -1.5;         ///< V, label only
  double rho_band = 0.10;        ///< reflection half-width of rho around 1
  double bound_band = 0.10;      ///< reflection half-width of each bound, fraction of nominal

  double range() const { return g_max_nominal - g_min_nominal; }

  void validate() const {
    if (!(g_min_nominal > 0.0) || !(g_max_nominal > g_min_nominal)) {
      throw std::invalid_argument("device: need 0 < g_min_nominal < g_max_nominal");
    }
    if (!(dt > 0.0)) {
      throw std::invalid_argument("device: dt must be > 0");
    }
    if (!(k_set > 0.0) || !(k_reset > 0.0)) {
      throw std::invalid_argument("device: k_set and k_reset must be > 0");
    }
    if (!(eps_floor > 0.0)) {
      throw std::invalid_argument("device: eps_floor must be > 0");
    }
    if (sigma_rate < 0.0 || sigma_bound < 0.0) {
      throw std::invalid_argument("device: sigma_rate and sigma_bound must be >= 0");
    }
    if (!(rho_band > 0.0 && rho_band < 1.0) || !(bound_band >= 0.0 && bound_band < 1.0)) {
      throw std::invalid_argument("device: reflection bands must lie in (0, 1)");
    }
    if (g_min_nominal * (1.0 + bound_band) >= g_max_nominal * (1.0 - bound_band)) {
      throw std::invalid_argument("device: bound reflection bands overlap");
    }
  }
};

/// Mutable state of one device. Owns its random stream, so a population of
/// devices with distinct seeds evolves independently and reproducibly.
struct DeviceState {
  double x = 0.5;      ///< internal switching variable in [0, 1]
  double g_min_t = 0;  ///< uS, current noisy lower bound
  double g_max_t = 0;  ///< uS, current noisy upper bound
  double rho = 1.0;    ///< rate multiplier, random-walk state
  Rng rng{0};
};

inline double read_conductance(const DeviceState& s) {
  return s.g_min_t + s.x * (s.g_max_t - s.g_min_t);
}

inline DeviceState new_device(const DeviceParams& p, std::uint64_t seed) {
  p.validate();
  DeviceState s;
  s.x = 0.5;
  s.g_min_t = p.g_min_nominal;
  s.g_max_t = p.g_max_nominal;
  s.rho = 1.0;
  s.rng = Rng(seed);
  return s;
}

/// Fresh device positioned at a given conductance (nominal bounds).
inline DeviceState device_at(const DeviceParams& p, double g_start, std::uint64_t seed) {
  DeviceState s = new_device(p, seed);
  if (g_start < p.g_min_nominal || g_start > p.g_max_nominal) {
    throw std::domain_error("device: start conductance outside nominal range");
  }
  s.x = (g_start - p.g_min_nominal) / p.range();
  return s;
}

namespace detail {

/// Switching speed |dx/dt| / (rho * k) at position x.
inline double switching_shape(double x, double eps) { return (x + eps) * (1.0 - x + eps); }

/// One noise-free explicit integration step of the internal variable.
inline double noise_free_step(double x, double k_dt, double eps, double dir) {
  return std::clamp(x + dir * k_dt * switching_shape(x, eps), 0.0, 1.0);
}

/// Mirror-reflect v into [lo, hi]. Step sizes are small against the band
/// width, so the loop almost never runs more than once.
inline double reflect_into(double v, double lo, double hi) {
  while (v < lo || v > hi) {
    if (v < lo) {
      v = 2.0 * lo - v;
    }
    if (v > hi) {
      v = 2.0 * hi - v;
    }
  }
  return v;
}

}  // namespace detail

/// One cycle-to-cycle noise update: random-walk steps on rho and both bounds,
/// each reflected back into its band. Zero-sigma channels are skipped so a
/// noiseless configuration leaves the state bit-identical.
inline void noise_step(DeviceState& s, const DeviceParams& p) {
  if (p.sigma_rate > 0.0) {
    s.rho = detail::reflect_into(s.rho + s.rng.gaussian(0.0, p.sigma_rate), 1.0 - p.rho_band,
                                 1.0 + p.rho_band);
  }
  if (p.sigma_bound > 0.0) {
    s.g_min_t = detail::reflect_into(s.g_min_t + s.rng.gaussian(0.0, p.sigma_bound),
                                     p.g_min_nominal * (1.0 - p.bound_band),
                                     p.g_min_nominal * (1.0 + p.bound_band));
    s.g_max_t = detail::reflect_into(s.g_max_t + s.rng.gaussian(0.0, p.sigma_bound),
                                     p.g_max_nominal * (1.0 - p.bound_band),
                                     p.g_max_nominal * (1.0 + p.bound_band));
  }
  s.x = std::clamp(s.x, 0.0, 1.0);
}

/// Number of dt quanta covering duration_ns; fractional remainders round up.
inline std::int64_t steps_for_duration(double duration_ns, double dt) {
  if (duration_ns <= 0.0) {
    return 0;
  }
  const double q = duration_ns / dt;
  const auto whole = static_cast<std::int64_t>(q);
  const double frac = q - static_cast<double>(whole);
  return whole + (frac > 1e-9 ? 1 : 0);
}

/// Apply one voltage pulse of the given polarity. The pulse is integrated as
/// one explicit step per dt; with `noisy` set, a noise_step follows every
/// integration step. Rise/fall edges are ignored, so consecutive pulses are
/// exactly equivalent to one long pulse with the same total step count.
inline void apply_pulse(DeviceState& s, const DeviceParams& p, Polarity pol, double duration_ns,
                        bool noisy) {
  if (!(duration_ns >= 0.0) || !std::isfinite(duration_ns)) {
    throw std::invalid_argument("apply_pulse: duration must be finite and non-negative");
  }
  const std::int64_t n_steps = steps_for_duration(duration_ns, p.dt);
  const double dir = polarity_sign(pol);
  const double k_dt = (pol == Polarity::kSet ? p.k_set : p.k_reset) * p.dt;
  for (std::int64_t i = 0; i < n_steps; ++i) {
    s.x = std::clamp(s.x + dir * s.rho * k_dt * detail::switching_shape(s.x, p.eps_floor), 0.0, 1.0);
    if (noisy) {
      noise_step(s, p);
    }
  }
}

/// Per-device conductance traces under a train of identical dt pulses,
/// starting from the bound opposite to the pulse direction. Device d uses
/// seed derive_seed(master_seed, d).
inline std::vector<std::vector<double>> switching_curves(const DeviceParams& p, int n_pulses,
                                                         int n_devices, Polarity pol, bool noisy,
                                                         std::uint64_t master_seed) {
  if (n_pulses < 1 || n_devices < 1) {
    throw std::invalid_argument("switching_curves: n_pulses and n_devices must be >= 1");
  }
  p.validate();
  std::vector<std::vector<double>> traces(static_cast<std::size_t>(n_devices));
  for (int d = 0; d < n_devices; ++d) {
    DeviceState s = new_device(p, derive_seed(master_seed, static_cast<std::uint64_t>(d)));
    s.x = pol == Polarity::kSet ? 0.0 : 1.0;
    auto& trace = traces[static_cast<std::size_t>(d)];
    trace.reserve(static_cast<std::size_t>(n_pulses));
    for (int i = 0; i < n_pulses; ++i) {
      apply_pulse(s, p, pol, p.dt, noisy);
      trace.push_back(read_conductance(s));
    }
  }
  return traces;
}

/// Noise-free step count for a full transit (x: 0.01 -> 0.99) of the slower
/// polarity. Used to cap open-ended pulse searches.
inline std::int64_t full_transit_steps(const DeviceParams& p) {
  const double k_dt = std::min(p.k_set, p.k_reset) * p.dt;
  double x = 0.01;
  std::int64_t steps = 0;
  while (x < 0.99) {
    x = detail::noise_free_step(x, k_dt, p.eps_floor, 1.0);
    ++steps;
    if (steps > (1LL << 40)) {
      throw std::runtime_error("full_transit_steps: transit did not complete");
    }
  }
  return steps;
}

}  // namespace memprog
