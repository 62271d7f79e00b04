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

#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "memprog/dataset.hpp"
#include "support/test_oracles.hpp"

using namespace memprog;

namespace {

GenConfig small_config(int n, std::uint64_t seed) {
  GenConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

/// Straddle index implied by a sample's history: first step whose conductance
/// crosses the target.
std::int64_t first_straddle(const Sample& s) {
  for (std::size_t i = 1; i < s.history_g.size(); ++i) {
    const double before = s.history_g[i - 1] - s.g_target;
    const double after = s.history_g[i] - s.g_target;
    if (before * after <= 0.0) {
      return static_cast<std::int64_t>(i);
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("normalization round trips and fixed points", "[dataset]") {
  NormConstants norm{400.0, 50000.0};
  REQUIRE(normalize_t(0.0, norm) == 0.5);
  REQUIRE(normalize_t(norm.t_ref, norm) == 1.0);
  REQUIRE(normalize_t(-norm.t_ref, norm) == 0.0);
  REQUIRE(normalize_g(400.0, norm) == 1.0);

  Rng rng(17);
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.uniform(0.0, 500.0);
    const double t = rng.uniform(-1e5, 1e5);
    REQUIRE(denormalize_g(normalize_g(g, norm), norm) == Approx(g).margin(1e-9));
    REQUIRE(denormalize_t(normalize_t(t, norm), norm) == Approx(t).margin(1e-7));
  }
}

TEST_CASE("generated samples satisfy the record contract", "[dataset]") {
  const DeviceParams p;
  const GenConfig cfg;
  const std::int64_t cap = cfg.step_cap_mult * full_transit_steps(p);

  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL, 6ULL, 7ULL, 8ULL}) {
    const Sample s = generate_sample(p, cfg, cap, seed);

    // sign convention and direction
    REQUIRE(s.t_steps != 0);
    if (s.g_target > s.g_start) {
      REQUIRE(s.t_steps > 0);
    } else {
      REQUIRE(s.t_steps < 0);
    }

    // history covers 2x the pulse duration on the dt grid
    const std::int64_t m = std::abs(s.t_steps);
    REQUIRE(static_cast<std::int64_t>(s.history_g.size()) == 2 * m + 1);
    REQUIRE(s.g_end == s.history_g[static_cast<std::size_t>(m)]);
    REQUIRE(s.history_g[0] == Approx(s.g_start));

    // the pulse endpoint is one of the two straddling values, and the closer one
    const std::int64_t cross = first_straddle(s);
    REQUIRE(cross >= 1);
    REQUIRE((m == cross || m == cross - 1));
    const double err_end = std::abs(s.g_end - s.g_target);
    const double err_other = std::abs(
        s.history_g[static_cast<std::size_t>(m == cross ? cross - 1 : cross)] - s.g_target);
    REQUIRE(err_end <= err_other);
  }
}

TEST_CASE("noise-free generation lands within one step of the target", "[dataset]") {
  DeviceParams p;
  p.sigma_rate = 0.0;
  p.sigma_bound = 0.0;
  GenConfig cfg;
  cfg.noisy = false;
  const std::int64_t cap = cfg.step_cap_mult * full_transit_steps(p);

  for (std::uint64_t seed : {10ULL, 11ULL, 12ULL, 13ULL}) {
    const Sample s = generate_sample(p, cfg, cap, seed);
    // reference: the brute-force scan lands on the same quantized endpoint
    const auto ref = testing::brute_force_pulse_steps(p, s.g_start, s.g_target - s.g_start,
                                                      2 * cap);
    REQUIRE(std::abs(s.t_steps) == ref.steps);
    REQUIRE(s.g_end == Approx(ref.g_landed).margin(1e-4));
    // and within a single mid-range step increment of the target
    const double max_step = 0.26 * std::max(p.k_set, p.k_reset) * p.dt * p.range();
    REQUIRE(std::abs(s.g_end - s.g_target) <= max_step);
  }
}

TEST_CASE("dataset split sizes, disjointness and coverage", "[dataset]") {
  const DeviceParams p;

  SECTION("n = 10 gives 8/1/1") {
    const Dataset ds = generate_dataset(p, small_config(10, 5));
    REQUIRE(ds.split.train.size() == 8);
    REQUIRE(ds.split.val.size() == 1);
    REQUIRE(ds.split.test.size() == 1);
  }
  SECTION("n = 200 gives 160/20/20, disjoint and covering") {
    const Dataset ds = generate_dataset(p, small_config(200, 5));
    REQUIRE(ds.split.train.size() == 160);
    REQUIRE(ds.split.val.size() == 20);
    REQUIRE(ds.split.test.size() == 20);
    std::set<std::uint32_t> seen;
    for (const auto* part : {&ds.split.train, &ds.split.val, &ds.split.test}) {
      for (const std::uint32_t idx : *part) {
        REQUIRE(seen.insert(idx).second);  // no duplicates across splits
        REQUIRE(idx < ds.samples.size());
      }
    }
    REQUIRE(seen.size() == 200);

    // both update directions are represented
    int n_set = 0;
    int n_reset = 0;
    for (const Sample& s : ds.samples) {
      (s.t_steps > 0 ? n_set : n_reset)++;
    }
    REQUIRE(n_set > 0);
    REQUIRE(n_reset > 0);
  }
}

TEST_CASE("dataset generation is deterministic and job-count independent", "[dataset]") {
  const DeviceParams p;
  GenConfig cfg = small_config(60, 21);

  const Dataset a = generate_dataset(p, cfg);
  const Dataset b = generate_dataset(p, cfg);
  REQUIRE(a.samples == b.samples);
  REQUIRE(a.split == b.split);
  REQUIRE(a.norm == b.norm);
  REQUIRE(a.rejected == b.rejected);

  cfg.jobs = 4;
  const Dataset c = generate_dataset(p, cfg);
  REQUIRE(a.samples == c.samples);
  REQUIRE(a.split == c.split);
}

TEST_CASE("normalization constants come from the training split", "[dataset]") {
  const DeviceParams p;
  const Dataset ds = generate_dataset(p, small_config(100, 33));
  REQUIRE(ds.norm.g_ref == p.g_max_nominal);
  double t_max = 0.0;
  for (const std::uint32_t idx : ds.split.train) {
    t_max = std::max(t_max, std::abs(ds.samples[idx].t_pulse_ns(p.dt)));
  }
  REQUIRE(ds.norm.t_ref == t_max);
  // normalized train pulse times live in [0, 1]
  for (const std::uint32_t idx : ds.split.train) {
    const double tn = normalize_t(ds.samples[idx].t_pulse_ns(p.dt), ds.norm);
    REQUIRE(tn >= 0.0);
    REQUIRE(tn <= 1.0);
  }
}

TEST_CASE("history suffix keeps evolving in the pulse polarity", "[dataset][property]") {
  DeviceParams p;
  p.sigma_rate = 0.0;
  p.sigma_bound = 0.0;
  GenConfig cfg;
  cfg.noisy = false;
  const std::int64_t cap = cfg.step_cap_mult * full_transit_steps(p);
  const Sample s = generate_sample(p, cfg, cap, 44);
  const auto m = static_cast<std::size_t>(std::abs(s.t_steps));
  for (std::size_t i = m; i + 1 < s.history_g.size(); ++i) {
    if (s.t_steps > 0) {
      REQUIRE(s.history_g[i + 1] >= s.history_g[i]);
    } else {
      REQUIRE(s.history_g[i + 1] <= s.history_g[i]);
    }
  }
}

TEST_CASE("degenerate dynamics trip the rejection-rate guard", "[dataset]") {
  // rate constants so large that one step jumps the full range: the start
  // point is then frequently the closer straddle value, which is rejected
  DeviceParams p;
  p.k_set = 1.0;
  p.k_reset = 1.0;
  GenConfig cfg = small_config(40, 3);
  REQUIRE_THROWS_AS(generate_dataset(p, cfg), std::runtime_error);
}

TEST_CASE("rejections are counted, not silently retried", "[dataset]") {
  const DeviceParams p;
  const Dataset ds = generate_dataset(p, small_config(120, 9));
  const double rate =
      static_cast<double>(ds.rejected) / static_cast<double>(ds.rejected + ds.samples.size());
  REQUIRE(rate < 0.5);
}
