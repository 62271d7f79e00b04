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
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memprog/dataset.hpp"
#include "memprog/device.hpp"
#include "memprog/nn.hpp"
#include "memprog/oracle.hpp"
#include "memprog/parallel.hpp"

namespace memprog {

/// Anything that can answer "how long a pulse do I apply to move the
/// conductance by delta_g from g_start". Evaluation drives devices purely
/// through read_conductance / apply_pulse, so predictors never see hidden
/// device state.
class PulsePredictor {
public:
  virtual ~PulsePredictor() = default;
  /// Signed pulse time in ns; positive SET, negative RESET.
  virtual double predict_t_ns(double g_start, double delta_g) const = 0;
  virtual std::string name() const = 0;
};

/// Neural predictor: normalizes the inputs, runs the network, denormalizes
/// the time.
class MlpPredictor final : public PulsePredictor {
public:
  MlpPredictor(Mlp model, NormConstants norm, std::string label = "mlp")
      : model_(std::move(model)), norm_(norm), label_(std::move(label)) {}

  double predict_t_ns(double g_start, double delta_g) const override {
    const double t_norm = model_.forward(normalize_g(g_start, norm_),
                                         normalize_g(delta_g, norm_));
    return denormalize_t(t_norm, norm_);
  }
  std::string name() const override { return label_; }

  const Mlp& model() const { return model_; }
  const NormConstants& norm() const { return norm_; }

private:
  Mlp model_;
  NormConstants norm_;
  std::string label_;
};

/// Noise-free baseline: solves for the pulse time on the deterministic model.
/// Inputs are clamped into the nominal range first, since a noisy device can
/// present conductances the noise-free model cannot represent.
class OraclePredictor final : public PulsePredictor {
public:
  OraclePredictor(DeviceParams params, OracleConfig cfg)
      : params_(params), cfg_(cfg) {}

  double predict_t_ns(double g_start, double delta_g) const override {
    const double g0 = std::clamp(g_start, params_.g_min_nominal, params_.g_max_nominal);
    const double target =
        std::clamp(g_start + delta_g, params_.g_min_nominal, params_.g_max_nominal);
    return oracle_pulse_time(params_, g0, target - g0, cfg_).t_ns;
  }
  std::string name() const override { return "oracle"; }

private:
  DeviceParams params_;
  OracleConfig cfg_;
};

/// Fixed-duration write policy: always pulse `pulse_ns` toward the target.
class FixedPulsePredictor final : public PulsePredictor {
public:
  explicit FixedPulsePredictor(double pulse_ns) : pulse_ns_(pulse_ns) {}

  double predict_t_ns(double /*g_start*/, double delta_g) const override {
    if (delta_g == 0.0) {
      return 0.0;
    }
    return delta_g > 0.0 ? pulse_ns_ : -pulse_ns_;
  }
  std::string name() const override { return "fixed-pulse"; }

private:
  double pulse_ns_;
};

struct OneShotOptions {
  int n_trials = 1000;
  std::uint64_t seed = 7;
  double margin_frac = 0.05;   ///< operational-range margin (matches dataset)
  double central_frac = 0.8;   ///< draw from this central fraction of the range
  double min_delta_g = 1.0;    ///< uS
  int n_bins = 8;              ///< per-axis bins of the sweep grid
  bool noisy = true;
  int jobs = 1;
};

struct OneShotTrial {
  double g_start = 0.0;
  double g_target = 0.0;
  double t_pred_ns = 0.0;
  double g_end = 0.0;
  double rpd = 0.0;
};

struct SweepCell {
  int start_bin = 0;
  int target_bin = 0;
  double mean_rpd = 0.0;
  double std_rpd = 0.0;
  int count = 0;
};

struct SweepReport {
  double range_lo = 0.0;   ///< uS, sampled conductance range
  double range_hi = 0.0;
  int n_bins = 0;
  std::vector<OneShotTrial> trials;
  std::vector<SweepCell> cells;  ///< only populated (g_start, g_target) bins
  double mean_rpd = 0.0;
  double frac_within_50pct = 0.0;
};

/// One-shot programming benchmark: per trial a fresh device is set to a
/// random start, the predictor proposes one pulse for the full remaining
/// delta, and the landing conductance is scored with the relative percentage
/// difference against the target.
inline SweepReport one_shot_eval(const PulsePredictor& predictor, const DeviceParams& params,
                                 const OneShotOptions& opt) {
  if (opt.n_trials < 1 || opt.n_bins < 1) {
    throw std::invalid_argument("eval: n_trials and n_bins must be >= 1");
  }
  if (!(opt.central_frac > 0.0 && opt.central_frac <= 1.0)) {
    throw std::invalid_argument("eval: central_frac must lie in (0, 1]");
  }
  params.validate();
  const double op_lo = op_range_lo(params, opt.margin_frac);
  const double op_hi = op_range_hi(params, opt.margin_frac);
  const double pad = 0.5 * (1.0 - opt.central_frac) * (op_hi - op_lo);
  const double lo = op_lo + pad;
  const double hi = op_hi - pad;

  SweepReport report;
  report.range_lo = lo;
  report.range_hi = hi;
  report.n_bins = opt.n_bins;
  report.trials.resize(static_cast<std::size_t>(opt.n_trials));

  parallel_for(0, opt.n_trials, opt.jobs, [&](std::int64_t i) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(i)));
    double g_start = 0.0;
    double g_target = 0.0;
    do {
      g_start = rng.uniform(lo, hi);
      g_target = rng.uniform(lo, hi);
    } while (std::abs(g_target - g_start) < opt.min_delta_g);

    DeviceState dev = device_at(params, g_start, rng.next_u64());
    const double t_pred = predictor.predict_t_ns(g_start, g_target - g_start);
    if (!std::isfinite(t_pred)) {
      throw std::runtime_error("eval: predictor produced a non-finite pulse time");
    }
    apply_pulse(dev, params, polarity_for_delta(t_pred), std::abs(t_pred), opt.noisy);
    const double g_end = read_conductance(dev);

    auto& trial = report.trials[static_cast<std::size_t>(i)];
    trial.g_start = g_start;
    trial.g_target = g_target;
    trial.t_pred_ns = t_pred;
    trial.g_end = g_end;
  });

  // aggregate with the shared RPD implementation
  std::vector<double> outs(report.trials.size());
  std::vector<double> tgts(report.trials.size());
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    outs[i] = report.trials[i].g_end;
    tgts[i] = report.trials[i].g_target;
  }
  const RpdReport agg = rpd(outs, tgts);
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    report.trials[i].rpd = agg.per_trial[i];
  }
  report.mean_rpd = agg.mean_rpd;
  report.frac_within_50pct = agg.frac_within_50pct;

  // per-cell statistics over the (g_start, g_target) grid
  const auto bin_of = [&](double v) {
    const int b = static_cast<int>((v - lo) / (hi - lo) * opt.n_bins);
    return std::clamp(b, 0, opt.n_bins - 1);
  };
  std::vector<double> sum(static_cast<std::size_t>(opt.n_bins) * opt.n_bins, 0.0);
  std::vector<double> sum_sq(sum.size(), 0.0);
  std::vector<int> count(sum.size(), 0);
  for (const OneShotTrial& t : report.trials) {
    const auto cell = static_cast<std::size_t>(bin_of(t.g_start) * opt.n_bins +
                                               bin_of(t.g_target));
    sum[cell] += t.rpd;
    sum_sq[cell] += t.rpd * t.rpd;
    ++count[cell];
  }
  for (int s = 0; s < opt.n_bins; ++s) {
    for (int t = 0; t < opt.n_bins; ++t) {
      const auto cell = static_cast<std::size_t>(s * opt.n_bins + t);
      if (count[cell] == 0) {
        continue;
      }
      SweepCell c;
      c.start_bin = s;
      c.target_bin = t;
      c.count = count[cell];
      c.mean_rpd = sum[cell] / count[cell];
      const double var = std::max(sum_sq[cell] / count[cell] - c.mean_rpd * c.mean_rpd, 0.0);
      c.std_rpd = std::sqrt(var);
      report.cells.push_back(c);
    }
  }
  return report;
}

struct WavOptions {
  int max_iter = 20;
  double window = 50.0;  ///< uS
  bool noisy = true;
  std::uint64_t seed = 11;
};

struct WavIteration {
  int iteration = 0;       ///< 1-based
  double t_pred_ns = 0.0;
  double g_after = 0.0;
};

struct WavTrajectory {
  double g_start = 0.0;
  double g_target = 0.0;
  std::vector<WavIteration> iterations;
  double converged_g = 0.0;
  std::optional<int> iters_to_window;  ///< first iteration inside target +/- window
};

/// Iterative program-and-read loop: every iteration reads the device,
/// predicts a pulse for the remaining delta and applies it. Runs all
/// max_iter iterations and records the trajectory.
inline WavTrajectory write_and_verify(const PulsePredictor& predictor, const DeviceParams& params,
                                      double g_start, double g_target, const WavOptions& opt) {
  params.validate();
  if (opt.max_iter < 1) {
    throw std::invalid_argument("eval: max_iter must be >= 1");
  }
  WavTrajectory traj;
  traj.g_start = g_start;
  traj.g_target = g_target;
  DeviceState dev = device_at(params, g_start, opt.seed);
  traj.converged_g = g_start;
  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    const double g_now = read_conductance(dev);
    const double t_pred = predictor.predict_t_ns(g_now, g_target - g_now);
    if (!std::isfinite(t_pred)) {
      throw std::runtime_error("eval: predictor produced a non-finite pulse time at iteration " +
                               std::to_string(iter));
    }
    apply_pulse(dev, params, polarity_for_delta(t_pred), std::abs(t_pred), opt.noisy);
    const double g_after = read_conductance(dev);
    traj.iterations.push_back({iter, t_pred, g_after});
    if (!traj.iters_to_window.has_value() && std::abs(g_after - g_target) <= opt.window) {
      traj.iters_to_window = iter;
    }
    traj.converged_g = g_after;
  }
  return traj;
}

struct WavSweepOptions {
  std::vector<double> targets = {100.0, 220.0, 340.0};  ///< uS
  int n_starts = 13;
  int repeats = 5;
  double margin_frac = 0.05;
  WavOptions wav;
};

struct WavSweepCell {
  double g_target = 0.0;
  double g_start = 0.0;
  double mean_converged = 0.0;
  double std_converged = 0.0;
  double mean_iters_to_window = 0.0;   ///< over converged repeats
  double frac_within_10_iters = 0.0;
  int repeats = 0;
};

struct WavSweepReport {
  std::vector<WavSweepCell> cells;
  std::vector<WavTrajectory> trajectories;  ///< all runs, grid-major order
};

/// Write-and-verify sweep: for each target, run trajectories from a grid of
/// start conductances spanning the operational range.
inline WavSweepReport wav_sweep(const PulsePredictor& predictor, const DeviceParams& params,
                                const WavSweepOptions& opt) {
  if (opt.n_starts < 1 || opt.repeats < 1) {
    throw std::invalid_argument("eval: n_starts and repeats must be >= 1");
  }
  const double lo = op_range_lo(params, opt.margin_frac);
  const double hi = op_range_hi(params, opt.margin_frac);
  WavSweepReport report;
  for (std::size_t ti = 0; ti < opt.targets.size(); ++ti) {
    const double target = opt.targets[ti];
    for (int si = 0; si < opt.n_starts; ++si) {
      const double g_start =
          opt.n_starts == 1 ? lo : lo + (hi - lo) * si / (opt.n_starts - 1);
      WavSweepCell cell;
      cell.g_target = target;
      cell.g_start = g_start;
      cell.repeats = opt.repeats;
      double sum = 0.0;
      double sum_sq = 0.0;
      double iters_sum = 0.0;
      int converged = 0;
      int within_10 = 0;
      for (int rep = 0; rep < opt.repeats; ++rep) {
        WavOptions wopt = opt.wav;
        wopt.seed = derive_seed(derive_seed(opt.wav.seed, ti * 1000003ULL + si),
                                static_cast<std::uint64_t>(rep));
        const WavTrajectory traj = write_and_verify(predictor, params, g_start, target, wopt);
        sum += traj.converged_g;
        sum_sq += traj.converged_g * traj.converged_g;
        if (traj.iters_to_window.has_value()) {
          iters_sum += *traj.iters_to_window;
          ++converged;
          if (*traj.iters_to_window <= 10) {
            ++within_10;
          }
        }
        report.trajectories.push_back(traj);
      }
      cell.mean_converged = sum / opt.repeats;
      const double var = std::max(sum_sq / opt.repeats - cell.mean_converged * cell.mean_converged, 0.0);
      cell.std_converged = std::sqrt(var);
      cell.mean_iters_to_window = converged > 0 ? iters_sum / converged : 0.0;
      cell.frac_within_10_iters = static_cast<double>(within_10) / opt.repeats;
      report.cells.push_back(cell);
    }
  }
  return report;
}

struct ConvergeResult {
  int iterations = 0;
  double cumulative_pulse_ns = 0.0;
  double converged_g = 0.0;
  bool converged = false;
};

/// Pulse-verify until |G - target| <= window or the iteration cap. The window
/// check runs before each pulse, so a start already inside the window costs
/// zero iterations. A cap hit is reported, not raised.
inline ConvergeResult converge_to_window(const PulsePredictor& predictor,
                                         const DeviceParams& params, double g_start,
                                         double g_target, double window, int cap, bool noisy,
                                         std::uint64_t seed) {
  DeviceState dev = device_at(params, g_start, seed);
  ConvergeResult r;
  for (int iter = 0; iter < cap; ++iter) {
    const double g_now = read_conductance(dev);
    if (std::abs(g_now - g_target) <= window) {
      r.converged_g = g_now;
      r.converged = true;
      return r;
    }
    const double t_pred = predictor.predict_t_ns(g_now, g_target - g_now);
    if (!std::isfinite(t_pred)) {
      throw std::runtime_error("eval: predictor produced a non-finite pulse time");
    }
    const auto steps = steps_for_duration(std::abs(t_pred), params.dt);
    apply_pulse(dev, params, polarity_for_delta(t_pred), std::abs(t_pred), noisy);
    r.cumulative_pulse_ns += static_cast<double>(steps) * params.dt;
    ++r.iterations;
  }
  r.converged_g = read_conductance(dev);
  r.converged = std::abs(r.converged_g - g_target) <= window;
  return r;
}

struct DelayBenchOptions {
  std::vector<double> targets = {100.0, 220.0, 340.0};  ///< uS
  double baseline_pulse_ns = 500.0;
  double window = 50.0;
  int cap = 500;
  int n_starts = 13;
  int repeats = 3;
  double margin_frac = 0.05;
  bool noisy = true;
  std::uint64_t seed = 13;
};

struct DelayRow {
  double g_target = 0.0;
  std::string method;
  double mean_iterations = 0.0;
  double mean_pulse_ns = 0.0;
  int runs = 0;
  int nonconverged = 0;
};

/// Programming-delay comparison: the predictor's write-and-verify loop versus
/// repeated fixed-duration pulses with a verify after each. Reports verify
/// iteration counts and cumulative pulse time per target.
inline std::vector<DelayRow> delay_benchmark(const PulsePredictor& predictor,
                                             const DeviceParams& params,
                                             const DelayBenchOptions& opt) {
  const FixedPulsePredictor baseline(opt.baseline_pulse_ns);
  const double lo = op_range_lo(params, opt.margin_frac);
  const double hi = op_range_hi(params, opt.margin_frac);
  std::vector<DelayRow> rows;
  for (std::size_t ti = 0; ti < opt.targets.size(); ++ti) {
    const double target = opt.targets[ti];
    DelayRow row_nn;
    row_nn.g_target = target;
    row_nn.method = predictor.name();
    DelayRow row_base;
    row_base.g_target = target;
    row_base.method = baseline.name();
    for (int si = 0; si < opt.n_starts; ++si) {
      const double g_start = opt.n_starts == 1 ? lo : lo + (hi - lo) * si / (opt.n_starts - 1);
      for (int rep = 0; rep < opt.repeats; ++rep) {
        const std::uint64_t seed =
            derive_seed(derive_seed(opt.seed, ti * 1000003ULL + si),
                        static_cast<std::uint64_t>(rep));
        const ConvergeResult a = converge_to_window(predictor, params, g_start, target,
                                                    opt.window, opt.cap, opt.noisy, seed);
        const ConvergeResult b = converge_to_window(baseline, params, g_start, target,
                                                    opt.window, opt.cap, opt.noisy, seed);
        row_nn.mean_iterations += a.iterations;
        row_nn.mean_pulse_ns += a.cumulative_pulse_ns;
        row_nn.nonconverged += a.converged ? 0 : 1;
        ++row_nn.runs;
        row_base.mean_iterations += b.iterations;
        row_base.mean_pulse_ns += b.cumulative_pulse_ns;
        row_base.nonconverged += b.converged ? 0 : 1;
        ++row_base.runs;
      }
    }
    row_nn.mean_iterations /= row_nn.runs;
    row_nn.mean_pulse_ns /= row_nn.runs;
    row_base.mean_iterations /= row_base.runs;
    row_base.mean_pulse_ns /= row_base.runs;
    rows.push_back(row_nn);
    rows.push_back(row_base);
  }
  return rows;
}

}  // namespace memprog
