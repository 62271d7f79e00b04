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
#include <numeric>
#include <stdexcept>
#include <vector>

#include "memprog/device.hpp"
#include "memprog/parallel.hpp"
#include "memprog/rng.hpp"

namespace memprog {

/// One training record. The pulse-time sign encodes the polarity (positive
/// SET, negative RESET). The conductance history covers twice the pulse
/// duration on the dt grid: entry i was recorded after i pulse quanta, i.e.
/// at signed time sign * i * dt, so |history| = 2*|t_steps| + 1.
struct Sample {
  double g_start = 0.0;   ///< uS
  double g_target = 0.0;  ///< uS
  double g_end = 0.0;     ///< uS, the straddling value closer to the target
  std::int64_t t_steps = 0;        ///< signed pulse quantum count
  std::vector<float> history_g;    ///< uS, recorded conductance per quantum

  double sign() const { return t_steps >= 0 ? 1.0 : -1.0; }
  double t_pulse_ns(double dt) const { return static_cast<double>(t_steps) * dt; }
  /// Signed time of history entry i.
  double history_t_ns(std::size_t i, double dt) const {
    return sign() * static_cast<double>(i) * dt;
  }

  bool operator==(const Sample&) const = default;
};

/// Normalization constants: conductances divide by g_ref, signed times map
/// through t -> 0.5 + 0.5 * t / t_ref so both polarities land in [0, 1].
struct NormConstants {
  double g_ref = 400.0;  ///< uS
  double t_ref = 1.0;    ///< ns

  bool operator==(const NormConstants&) const = default;
};

inline double normalize_g(double g_us, const NormConstants& n) { return g_us / n.g_ref; }
inline double denormalize_g(double g_norm, const NormConstants& n) { return g_norm * n.g_ref; }
inline double normalize_t(double t_ns, const NormConstants& n) { return 0.5 + 0.5 * t_ns / n.t_ref; }
inline double denormalize_t(double t_norm, const NormConstants& n) {
  return (t_norm - 0.5) * 2.0 * n.t_ref;
}

struct GenConfig {
  int n = 10000;                 ///< accepted samples to produce
  std::uint64_t seed = 42;       ///< master seed; sample i derives its own stream
  double margin_frac = 0.05;     ///< operational-range margin, fraction of the range
  double min_delta_g = 1.0;      ///< uS, resample targets closer than this to the start
  int step_cap_mult = 2;         ///< straddle step cap, multiples of a full transit
  bool noisy = true;
  int jobs = 1;
  int max_attempts_per_sample = 64;

  void validate() const {
    if (n < 10) {
      throw std::invalid_argument("dataset: n must be >= 10");
    }
    if (!(margin_frac >= 0.0 && margin_frac < 0.5)) {
      throw std::invalid_argument("dataset: margin_frac must lie in [0, 0.5)");
    }
    if (!(min_delta_g > 0.0)) {
      throw std::invalid_argument("dataset: min_delta_g must be > 0");
    }
    if (step_cap_mult < 1) {
      throw std::invalid_argument("dataset: step_cap_mult must be >= 1");
    }
    if (max_attempts_per_sample < 1) {
      throw std::invalid_argument("dataset: max_attempts_per_sample must be >= 1");
    }
  }
};

inline double op_range_lo(const DeviceParams& p, double margin_frac) {
  return p.g_min_nominal + margin_frac * p.range();
}
inline double op_range_hi(const DeviceParams& p, double margin_frac) {
  return p.g_max_nominal - margin_frac * p.range();
}

struct SplitIndices {
  std::vector<std::uint32_t> train;
  std::vector<std::uint32_t> val;
  std::vector<std::uint32_t> test;

  bool operator==(const SplitIndices&) const = default;
};

struct Dataset {
  DeviceParams device;
  std::vector<Sample> samples;
  SplitIndices split;
  NormConstants norm;
  std::uint64_t seed = 0;
  std::uint64_t rejected = 0;  ///< discarded draws (no straddle in cap, or degenerate)
};

namespace detail {

/// One generation attempt. Returns false when no straddle occurred within the
/// step cap or when the closer straddle point is the start itself (which
/// would produce a zero pulse time and an undefined sign).
inline bool try_generate_sample(const DeviceParams& p, const GenConfig& cfg,
                                std::int64_t step_cap, std::uint64_t attempt_seed, Sample& out) {
  Rng rng(attempt_seed);
  const double lo = op_range_lo(p, cfg.margin_frac);
  const double hi = op_range_hi(p, cfg.margin_frac);

  double g_start = 0.0;
  double g_target = 0.0;
  do {
    g_start = rng.uniform(lo, hi);
    g_target = rng.uniform(lo, hi);
  } while (std::abs(g_target - g_start) < cfg.min_delta_g);

  const double dir = g_target > g_start ? 1.0 : -1.0;
  const Polarity pol = g_target > g_start ? Polarity::kSet : Polarity::kReset;
  DeviceState dev = device_at(p, g_start, rng.next_u64());

  std::vector<double> traj;
  traj.reserve(512);
  traj.push_back(g_start);
  std::int64_t straddle = -1;
  for (std::int64_t i = 1; i <= step_cap; ++i) {
    apply_pulse(dev, p, pol, p.dt, cfg.noisy);
    traj.push_back(read_conductance(dev));
    const double before = traj[static_cast<std::size_t>(i - 1)] - g_target;
    const double after = traj[static_cast<std::size_t>(i)] - g_target;
    if (before * after <= 0.0) {
      straddle = i;
      break;
    }
  }
  if (straddle < 0) {
    return false;
  }

  const double err_before = std::abs(traj[static_cast<std::size_t>(straddle - 1)] - g_target);
  const double err_after = std::abs(traj[static_cast<std::size_t>(straddle)] - g_target);
  const std::int64_t m = err_before <= err_after ? straddle - 1 : straddle;
  if (m == 0) {
    return false;
  }

  // keep pulsing to fill the history out to 2 * |t_pulse|
  while (static_cast<std::int64_t>(traj.size()) - 1 < 2 * m) {
    apply_pulse(dev, p, pol, p.dt, cfg.noisy);
    traj.push_back(read_conductance(dev));
  }

  out.g_start = g_start;
  out.g_target = g_target;
  out.t_steps = dir > 0.0 ? m : -m;
  out.history_g.assign(traj.begin(), traj.begin() + static_cast<std::ptrdiff_t>(2 * m + 1));
  out.g_end = out.history_g[static_cast<std::size_t>(m)];
  return true;
}

}  // namespace detail

/// Generate one accepted sample; rejected attempts retry on a derived seed and
/// are tallied into *rejections when provided.
inline Sample generate_sample(const DeviceParams& p, const GenConfig& cfg, std::int64_t step_cap,
                              std::uint64_t sample_seed, std::uint64_t* rejections = nullptr) {
  Sample s;
  for (int attempt = 0; attempt < cfg.max_attempts_per_sample; ++attempt) {
    const std::uint64_t attempt_seed = derive_seed(sample_seed, static_cast<std::uint64_t>(attempt));
    if (detail::try_generate_sample(p, cfg, step_cap, attempt_seed, s)) {
      return s;
    }
    if (rejections != nullptr) {
      ++*rejections;
    }
  }
  throw std::runtime_error("dataset: sample generation exhausted its attempt budget");
}

/// Convenience overload computing the step cap from the device parameters.
inline Sample generate_sample(const DeviceParams& p, const GenConfig& cfg,
                              std::uint64_t sample_seed, std::uint64_t* rejections = nullptr) {
  return generate_sample(p, cfg, cfg.step_cap_mult * full_transit_steps(p), sample_seed,
                         rejections);
}

/// Generate the full corpus: n accepted samples on per-index derived seeds
/// (order-stable for any job count), an 80/10/10 split from a seeded shuffle,
/// and normalization constants taken from the training split only.
inline Dataset generate_dataset(const DeviceParams& p, const GenConfig& cfg) {
  p.validate();
  cfg.validate();
  const std::int64_t step_cap = cfg.step_cap_mult * full_transit_steps(p);

  Dataset ds;
  ds.device = p;
  ds.seed = cfg.seed;
  ds.samples.resize(static_cast<std::size_t>(cfg.n));
  std::vector<std::uint64_t> rejections(static_cast<std::size_t>(cfg.n), 0);

  parallel_for(0, cfg.n, cfg.jobs, [&](std::int64_t i) {
    const std::uint64_t sample_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    ds.samples[static_cast<std::size_t>(i)] =
        generate_sample(p, cfg, step_cap, sample_seed, &rejections[static_cast<std::size_t>(i)]);
  });

  ds.rejected = std::accumulate(rejections.begin(), rejections.end(), std::uint64_t{0});
  const double reject_rate = static_cast<double>(ds.rejected) /
                             static_cast<double>(ds.rejected + static_cast<std::uint64_t>(cfg.n));
  if (reject_rate > 0.5) {
    throw std::runtime_error(
        "dataset: rejection rate above 50%; operational range and noise settings are "
        "inconsistent with the device dynamics");
  }

  // deterministic split: Fisher-Yates on a derived stream, then 80/10/10
  std::vector<std::uint32_t> order(static_cast<std::size_t>(cfg.n));
  std::iota(order.begin(), order.end(), 0U);
  Rng shuffle_rng(derive_seed(cfg.seed, 0xFFFFFFFF00000001ULL));
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % (i + 1));
    std::swap(order[i], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(cfg.n) * 8 / 10;
  const auto n_val = static_cast<std::size_t>(cfg.n) / 10;
  ds.split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  ds.split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                      order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  ds.split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());

  ds.norm.g_ref = p.g_max_nominal;
  double t_max = 0.0;
  for (const std::uint32_t idx : ds.split.train) {
    t_max = std::max(t_max, std::abs(ds.samples[idx].t_pulse_ns(p.dt)));
  }
  ds.norm.t_ref = t_max > 0.0 ? t_max : 1.0;
  return ds;
}

}  // namespace memprog
