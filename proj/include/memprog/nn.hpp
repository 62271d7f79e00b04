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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "memprog/dataset.hpp"
#include "memprog/gtmap.hpp"
#include "memprog/rng.hpp"

namespace memprog {

/// Fully connected regression network. Hidden layers use ReLU, the output
/// head is linear (predicted times may fall outside [0, 1]). Weights are
/// row-major [out][in].
struct Mlp {
  std::vector<int> layer_sizes;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  std::string activation = "relu";

  int n_layers() const { return static_cast<int>(weights.size()); }
  int input_size() const { return layer_sizes.front(); }
  int output_size() const { return layer_sizes.back(); }

  static void check_sizes(const std::vector<int>& sizes) {
    if (sizes.size() < 2) {
      throw std::invalid_argument("nn: need at least an input and an output layer");
    }
    for (const int s : sizes) {
      if (s < 1) {
        throw std::invalid_argument("nn: layer sizes must be >= 1");
      }
    }
  }

  /// Zero-weight network (forwards to zero; handy as a test fixture).
  static Mlp zeros(std::vector<int> sizes) {
    check_sizes(sizes);
    Mlp m;
    m.layer_sizes = std::move(sizes);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
      const auto in = static_cast<std::size_t>(m.layer_sizes[l]);
      const auto out = static_cast<std::size_t>(m.layer_sizes[l + 1]);
      m.weights.emplace_back(in * out, 0.0);
      m.biases.emplace_back(out, 0.0);
    }
    return m;
  }

  /// Fan-in scaled uniform initialization, U(-1/sqrt(fan_in), +1/sqrt(fan_in)).
  static Mlp init(std::vector<int> sizes, std::uint64_t seed) {
    Mlp m = zeros(std::move(sizes));
    Rng rng(seed);
    for (int l = 0; l < m.n_layers(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(m.layer_sizes[l]));
      for (auto& w : m.weights[static_cast<std::size_t>(l)]) {
        w = rng.uniform(-bound, bound);
      }
      for (auto& b : m.biases[static_cast<std::size_t>(l)]) {
        b = rng.uniform(-bound, bound);
      }
    }
    return m;
  }

  /// Forward pass into caller-provided activation storage (one vector per
  /// layer output). Returns the scalar head value.
  double forward_into(std::span<const double> input,
                      std::vector<std::vector<double>>& acts) const {
    acts.resize(static_cast<std::size_t>(n_layers()));
    std::span<const double> cur = input;
    for (int l = 0; l < n_layers(); ++l) {
      const auto in = static_cast<std::size_t>(layer_sizes[static_cast<std::size_t>(l)]);
      const auto out = static_cast<std::size_t>(layer_sizes[static_cast<std::size_t>(l) + 1]);
      auto& next = acts[static_cast<std::size_t>(l)];
      next.assign(out, 0.0);
      const auto& w = weights[static_cast<std::size_t>(l)];
      const auto& b = biases[static_cast<std::size_t>(l)];
      const bool hidden = l + 1 < n_layers();
      for (std::size_t o = 0; o < out; ++o) {
        double acc = b[o];
        const double* row = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          acc += row[i] * cur[i];
        }
        next[o] = hidden ? std::max(acc, 0.0) : acc;
      }
      cur = next;
    }
    return acts.back()[0];
  }

  /// Scalar forward for the (g_start, delta_g) -> t predictor shape.
  double forward(double g_start_norm, double delta_g_norm) const {
    const std::array<double, 2> in = {g_start_norm, delta_g_norm};
    std::vector<std::vector<double>> acts;
    return forward_into(in, acts);
  }

  bool operator==(const Mlp&) const = default;
};

/// Per-parameter gradient accumulator, same shapes as the network.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const Mlp& m) {
    Gradients g;
    g.weights.reserve(m.weights.size());
    g.biases.reserve(m.biases.size());
    for (const auto& w : m.weights) {
      g.weights.emplace_back(w.size(), 0.0);
    }
    for (const auto& b : m.biases) {
      g.biases.emplace_back(b.size(), 0.0);
    }
    return g;
  }

  void clear() {
    for (auto& w : weights) {
      std::fill(w.begin(), w.end(), 0.0);
    }
    for (auto& b : biases) {
      std::fill(b.begin(), b.end(), 0.0);
    }
  }
};

namespace detail {

/// Accumulate exact parameter gradients for one sample given the upstream
/// derivative dL/dy of the scalar output. `acts` must hold the activations of
/// a forward_into call on the same input.
inline void backprop_sample(const Mlp& m, std::span<const double> input,
                            const std::vector<std::vector<double>>& acts, double dldy,
                            Gradients& grads, std::vector<std::vector<double>>& delta_scratch) {
  const int layers = m.n_layers();
  delta_scratch.resize(static_cast<std::size_t>(layers));
  delta_scratch[static_cast<std::size_t>(layers - 1)].assign(1, dldy);

  for (int l = layers - 1; l >= 0; --l) {
    const auto in = static_cast<std::size_t>(m.layer_sizes[static_cast<std::size_t>(l)]);
    const auto out = static_cast<std::size_t>(m.layer_sizes[static_cast<std::size_t>(l) + 1]);
    const auto& w = m.weights[static_cast<std::size_t>(l)];
    const auto& delta = delta_scratch[static_cast<std::size_t>(l)];
    const std::span<const double> prev =
        l == 0 ? input : std::span<const double>(acts[static_cast<std::size_t>(l - 1)]);

    auto& gw = grads.weights[static_cast<std::size_t>(l)];
    auto& gb = grads.biases[static_cast<std::size_t>(l)];
    for (std::size_t o = 0; o < out; ++o) {
      gb[o] += delta[o];
      double* grow = gw.data() + o * in;
      for (std::size_t i = 0; i < in; ++i) {
        grow[i] += delta[o] * prev[i];
      }
    }
    if (l > 0) {
      auto& prev_delta = delta_scratch[static_cast<std::size_t>(l - 1)];
      prev_delta.assign(in, 0.0);
      const auto& prev_act = acts[static_cast<std::size_t>(l - 1)];
      for (std::size_t o = 0; o < out; ++o) {
        const double* row = w.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) {
          prev_delta[i] += row[i] * delta[o];
        }
      }
      // ReLU mask of the hidden layer feeding this one
      for (std::size_t i = 0; i < in; ++i) {
        if (prev_act[i] <= 0.0) {
          prev_delta[i] = 0.0;
        }
      }
    }
  }
}

}  // namespace detail

/// Mean squared error over a batch of scalar outputs.
inline double mse_loss(std::span<const double> outputs, std::span<const double> targets) {
  if (outputs.size() != targets.size() || outputs.empty()) {
    throw std::invalid_argument("nn: mse_loss needs equal, non-empty spans");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const double d = outputs[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(outputs.size());
}

/// Exact gradients of the batch-mean MSE loss w.r.t. all weights and biases.
/// Optionally reports the batch loss.
inline Gradients backward_mse(const Mlp& m, std::span<const std::array<double, 2>> inputs,
                              std::span<const double> targets, double* loss_out = nullptr) {
  if (inputs.size() != targets.size() || inputs.empty()) {
    throw std::invalid_argument("nn: backward_mse needs equal, non-empty batches");
  }
  Gradients grads = Gradients::zeros_like(m);
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> delta;
  const double inv_b = 1.0 / static_cast<double>(inputs.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const double y = m.forward_into(inputs[i], acts);
    const double err = y - targets[i];
    loss += err * err;
    detail::backprop_sample(m, inputs[i], acts, 2.0 * err * inv_b, grads, delta);
  }
  if (loss_out != nullptr) {
    *loss_out = loss * inv_b;
  }
  return grads;
}

/// Minibatch SGD with classical momentum.
class SgdMomentum {
public:
  SgdMomentum(const Mlp& m, double learning_rate, double momentum)
      : lr_(learning_rate), momentum_(momentum), velocity_(Gradients::zeros_like(m)) {}

  void step(Mlp& m, const Gradients& grads) {
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
      auto& vw = velocity_.weights[l];
      auto& w = m.weights[l];
      const auto& gw = grads.weights[l];
      for (std::size_t i = 0; i < w.size(); ++i) {
        vw[i] = momentum_ * vw[i] - lr_ * gw[i];
        w[i] += vw[i];
      }
      auto& vb = velocity_.biases[l];
      auto& b = m.biases[l];
      const auto& gb = grads.biases[l];
      for (std::size_t i = 0; i < b.size(); ++i) {
        vb[i] = momentum_ * vb[i] - lr_ * gb[i];
        b[i] += vb[i];
      }
    }
  }

private:
  double lr_;
  double momentum_;
  Gradients velocity_;
};

/// Relative percentage difference report: per-trial |out - tgt| / tgt.
/// Non-positive targets cannot be scored and are excluded but counted.
struct RpdReport {
  double mean_rpd = 0.0;
  std::vector<double> per_trial;
  double frac_within_50pct = 0.0;
  std::size_t n_excluded = 0;
};

inline RpdReport rpd(std::span<const double> outputs, std::span<const double> targets) {
  if (outputs.size() != targets.size()) {
    throw std::invalid_argument("nn: rpd needs equal-length spans");
  }
  RpdReport report;
  report.per_trial.reserve(outputs.size());
  double acc = 0.0;
  std::size_t within = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (!(targets[i] > 0.0)) {
      ++report.n_excluded;
      continue;
    }
    const double r = std::abs(outputs[i] - targets[i]) / targets[i];
    report.per_trial.push_back(r);
    acc += r;
    if (r < 0.5) {
      ++within;
    }
  }
  if (report.per_trial.empty()) {
    report.mean_rpd = std::numeric_limits<double>::quiet_NaN();
    return report;
  }
  report.mean_rpd = acc / static_cast<double>(report.per_trial.size());
  report.frac_within_50pct = static_cast<double>(within) /
                             static_cast<double>(report.per_trial.size());
  return report;
}

enum class CheckpointMetric { kRpdT, kRpdG };

struct TrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 1;
  CheckpointMetric metric = CheckpointMetric::kRpdT;
  std::vector<int> layer_sizes = {2, 32, 64, 32, 1};

  void validate() const {
    if (epochs < 1) {
      throw std::invalid_argument("nn: epochs must be >= 1");
    }
    if (batch_size < 1) {
      throw std::invalid_argument("nn: batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
      throw std::invalid_argument("nn: learning_rate must be > 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw std::invalid_argument("nn: momentum must lie in [0, 1)");
    }
    Mlp::check_sizes(layer_sizes);
    if (layer_sizes.front() != 2 || layer_sizes.back() != 1) {
      throw std::invalid_argument("nn: pulse predictor needs 2 inputs and 1 output");
    }
  }
};

/// Epoch 0 holds the pre-training statistics of the freshly initialized model.
struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double val_rpd = 0.0;
};

struct TrainResult {
  Mlp model;            ///< best-validation checkpoint
  NormConstants norm;   ///< normalization the model was trained under
  std::vector<EpochStats> history;
  double best_val_rpd = 0.0;
  int best_epoch = 0;
};

namespace detail {

/// Validation RPD in the configured space. Time-space RPD compares normalized
/// times directly (positive by construction); conductance-space RPD maps each
/// prediction through the sample's own recorded history (raw, kernel 1) and
/// compares conductances.
inline double validation_rpd(const Mlp& m, const Dataset& ds,
                             std::span<const std::uint32_t> indices, CheckpointMetric metric,
                             std::vector<double>& scratch_smooth) {
  std::vector<double> outputs;
  std::vector<double> targets;
  outputs.reserve(indices.size());
  targets.reserve(indices.size());
  for (const std::uint32_t idx : indices) {
    const Sample& s = ds.samples[idx];
    const double t_norm = m.forward(normalize_g(s.g_start, ds.norm),
                                    normalize_g(s.g_target - s.g_start, ds.norm));
    if (metric == CheckpointMetric::kRpdT) {
      outputs.push_back(t_norm);
      targets.push_back(normalize_t(s.t_pulse_ns(ds.device.dt), ds.norm));
    } else {
      moving_average(s.history_g, 1, scratch_smooth);
      const double g_norm =
          pwl_value_norm(scratch_smooth, s.sign(), ds.device.dt, ds.norm, t_norm);
      outputs.push_back(denormalize_g(g_norm, ds.norm));
      targets.push_back(s.g_target);
    }
  }
  return rpd(outputs, targets).mean_rpd;
}

}  // namespace detail

/// Minibatch MSE training of the pulse predictor on normalized
/// (g_start, delta_g) -> t. Checkpoints on the best validation RPD in the
/// configured space; epoch 0 records the untrained model. Deterministic for a
/// fixed (dataset, config).
inline TrainResult train(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  if (ds.split.train.empty() || ds.split.val.empty()) {
    throw std::invalid_argument("nn: dataset has empty train or validation split");
  }

  const auto n_train = ds.split.train.size();
  std::vector<std::array<double, 2>> inputs(n_train);
  std::vector<double> targets(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    const Sample& s = ds.samples[ds.split.train[i]];
    inputs[i] = {normalize_g(s.g_start, ds.norm), normalize_g(s.g_target - s.g_start, ds.norm)};
    targets[i] = normalize_t(s.t_pulse_ns(ds.device.dt), ds.norm);
  }

  TrainResult result;
  result.norm = ds.norm;
  Mlp model = Mlp::init(cfg.layer_sizes, derive_seed(cfg.seed, 1));
  SgdMomentum opt(model, cfg.learning_rate, cfg.momentum);
  Rng shuffle_rng(derive_seed(cfg.seed, 2));
  std::vector<double> scratch_smooth;

  // pre-training snapshot
  {
    std::vector<double> outs(n_train);
    std::vector<std::vector<double>> acts;
    for (std::size_t i = 0; i < n_train; ++i) {
      outs[i] = model.forward_into(inputs[i], acts);
    }
    const double rpd0 =
        detail::validation_rpd(model, ds, ds.split.val, cfg.metric, scratch_smooth);
    result.history.push_back({0, mse_loss(outs, targets), rpd0});
    result.model = model;
    result.best_val_rpd = rpd0;
    result.best_epoch = 0;
  }

  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::array<double, 2>> batch_in;
  std::vector<double> batch_tgt;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % (i + 1));
      std::swap(order[i], order[j]);
    }
    double epoch_loss = 0.0;
    std::size_t pos = 0;
    while (pos < n_train) {
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                     n_train - pos);
      batch_in.clear();
      batch_tgt.clear();
      for (std::size_t k = 0; k < take; ++k) {
        batch_in.push_back(inputs[order[pos + k]]);
        batch_tgt.push_back(targets[order[pos + k]]);
      }
      double batch_loss = 0.0;
      const Gradients grads = backward_mse(model, batch_in, batch_tgt, &batch_loss);
      opt.step(model, grads);
      epoch_loss += batch_loss * static_cast<double>(take);
      pos += take;
    }
    epoch_loss /= static_cast<double>(n_train);
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("nn: training diverged (loss not finite) at epoch " +
                               std::to_string(epoch));
    }
    const double val =
        detail::validation_rpd(model, ds, ds.split.val, cfg.metric, scratch_smooth);
    result.history.push_back({epoch, epoch_loss, val});
    if (val < result.best_val_rpd) {
      result.best_val_rpd = val;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

}  // namespace memprog
