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

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "memprog/gtmap.hpp"
#include "memprog/nn.hpp"

namespace memprog {

struct KernelStage {
  int kernel = 1;
  int epochs = 50;
};

/// Decreasing smoothing-kernel curriculum: coarse kernels first to stabilize
/// early fine-tuning, raw histories last.
struct KernelSchedule {
  std::vector<KernelStage> stages;

  static KernelSchedule defaults() {
    return KernelSchedule{{{1001, 50}, {101, 50}, {11, 50}, {1, 50}}};
  }

  /// Parse "1001:50,101:50,11:50,1:50".
  static KernelSchedule parse(std::string_view text) {
    KernelSchedule schedule;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      const std::string_view item = text.substr(pos, comma - pos);
      const std::size_t colon = item.find(':');
      if (item.empty() || colon == std::string_view::npos) {
        throw std::invalid_argument("finetune: schedule items must look like kernel:epochs");
      }
      KernelStage stage;
      const auto parse_int = [&](std::string_view sv, int& out) {
        const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), out);
        if (res.ec != std::errc{} || res.ptr != sv.data() + sv.size()) {
          throw std::invalid_argument("finetune: bad integer in schedule: " + std::string(sv));
        }
      };
      parse_int(item.substr(0, colon), stage.kernel);
      parse_int(item.substr(colon + 1), stage.epochs);
      schedule.stages.push_back(stage);
      if (comma == text.size()) {
        break;
      }
      pos = comma + 1;
    }
    schedule.validate();
    return schedule;
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (i > 0) {
        out += ',';
      }
      out += std::to_string(stages[i].kernel) + ':' + std::to_string(stages[i].epochs);
    }
    return out;
  }

  void validate() const {
    if (stages.empty()) {
      throw std::invalid_argument("finetune: schedule must have at least one stage");
    }
    int prev_kernel = 0;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const auto& st = stages[i];
      if (st.kernel < 1 || st.kernel % 2 == 0) {
        throw std::invalid_argument("finetune: kernels must be odd and >= 1");
      }
      if (st.epochs < 0) {
        throw std::invalid_argument("finetune: stage epochs must be >= 0");
      }
      if (i > 0 && st.kernel >= prev_kernel) {
        throw std::invalid_argument("finetune: kernels must be strictly decreasing");
      }
      prev_kernel = st.kernel;
    }
  }
};

struct FinetuneConfig {
  int batch_size = 64;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  std::uint64_t seed = 2;

  void validate() const {
    if (batch_size < 1) {
      throw std::invalid_argument("finetune: batch_size must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
      throw std::invalid_argument("finetune: learning_rate must be > 0");
    }
    if (!(momentum >= 0.0 && momentum < 1.0)) {
      throw std::invalid_argument("finetune: momentum must lie in [0, 1)");
    }
  }
};

struct StageEpochStats {
  int stage = 0;
  int kernel = 1;
  int epoch = 0;
  double train_mse = 0.0;   ///< conductance-space MSE under the stage kernel
  double val_rpd_g = 0.0;   ///< validation RPD on conductances, raw histories
};

struct FinetuneResult {
  Mlp model;  ///< best validation-RPD_G checkpoint across all stages
  std::vector<StageEpochStats> history;
  double best_val_rpd_g = 0.0;
  int best_stage = 0;
  int best_epoch = 0;
};

/// Fine-tune a trained pulse predictor on conductance-space MSE. The forward
/// path maps each predicted time through the sample's own recorded history
/// (smoothed with the stage kernel); the backward path routes the loss
/// through the clamped piecewise gradient, so out-of-range predictions still
/// receive a restoring signal. Validation uses raw (kernel 1) histories in
/// every stage, which keeps checkpoints comparable across the schedule; the
/// best checkpoint seen anywhere (including the input model) is returned.
inline FinetuneResult finetune(const Mlp& start, const Dataset& ds,
                               const KernelSchedule& schedule, const FinetuneConfig& cfg) {
  schedule.validate();
  cfg.validate();
  if (ds.split.train.empty() || ds.split.val.empty()) {
    throw std::invalid_argument("finetune: dataset has empty train or validation split");
  }

  const auto n_train = ds.split.train.size();
  std::vector<std::array<double, 2>> inputs(n_train);
  std::vector<double> g_target_norm(n_train);
  for (std::size_t i = 0; i < n_train; ++i) {
    const Sample& s = ds.samples[ds.split.train[i]];
    inputs[i] = {normalize_g(s.g_start, ds.norm), normalize_g(s.g_target - s.g_start, ds.norm)};
    g_target_norm[i] = normalize_g(s.g_target, ds.norm);
  }

  FinetuneResult result;
  Mlp model = start;
  std::vector<double> scratch_smooth;
  result.model = start;
  result.best_val_rpd_g =
      detail::validation_rpd(start, ds, ds.split.val, CheckpointMetric::kRpdG, scratch_smooth);
  result.best_stage = 0;
  result.best_epoch = 0;

  SgdMomentum opt(model, cfg.learning_rate, cfg.momentum);
  Rng shuffle_rng(derive_seed(cfg.seed, 3));
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), 0);

  Gradients grads = Gradients::zeros_like(model);
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> delta;

  int stage_index = 0;
  for (const KernelStage& stage : schedule.stages) {
    ++stage_index;
    for (int epoch = 1; epoch <= stage.epochs; ++epoch) {
      for (std::size_t i = order.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(shuffle_rng.next_u64() % (i + 1));
        std::swap(order[i], order[j]);
      }
      double epoch_loss = 0.0;
      std::size_t pos = 0;
      while (pos < n_train) {
        const std::size_t take = std::min<std::size_t>(
            static_cast<std::size_t>(cfg.batch_size), n_train - pos);
        grads.clear();
        const double inv_b = 1.0 / static_cast<double>(take);
        double batch_loss = 0.0;
        for (std::size_t k = 0; k < take; ++k) {
          const std::size_t row = order[pos + k];
          const Sample& s = ds.samples[ds.split.train[row]];
          const double t_norm = model.forward_into(inputs[row], acts);
          detail::moving_average(s.history_g, stage.kernel, scratch_smooth);
          const double g_out =
              detail::pwl_value_norm(scratch_smooth, s.sign(), ds.device.dt, ds.norm, t_norm);
          const double g_grad =
              detail::pwl_grad_norm(scratch_smooth, s.sign(), ds.device.dt, ds.norm, t_norm);
          const double err = g_out - g_target_norm[row];
          batch_loss += err * err;
          detail::backprop_sample(model, inputs[row], acts, 2.0 * err * inv_b * g_grad, grads,
                                  delta);
        }
        opt.step(model, grads);
        epoch_loss += batch_loss;
        pos += take;
      }
      epoch_loss /= static_cast<double>(n_train);
      if (!std::isfinite(epoch_loss)) {
        throw std::runtime_error("finetune: diverged (loss not finite) in stage " +
                                 std::to_string(stage_index) + " (kernel " +
                                 std::to_string(stage.kernel) + "), epoch " +
                                 std::to_string(epoch));
      }
      const double val = detail::validation_rpd(model, ds, ds.split.val,
                                                CheckpointMetric::kRpdG, scratch_smooth);
      result.history.push_back({stage_index, stage.kernel, epoch, epoch_loss, val});
      if (val < result.best_val_rpd_g) {
        result.best_val_rpd_g = val;
        result.best_stage = stage_index;
        result.best_epoch = epoch;
        result.model = model;
      }
    }
  }
  return result;
}

}  // namespace memprog
