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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "memprog/eval.hpp"
#include "memprog/finetune.hpp"
#include "memprog/serialize.hpp"

namespace memprog {

/// Evaluation settings shared by the eval subcommands. The operational-range
/// margin always follows the dataset section so deployment and data
/// generation see the same range.
struct EvalSettings {
  int trials = 1000;
  int bins = 8;
  double central_frac = 0.8;
  double min_delta_g = 1.0;
  double window = 50.0;
  int max_iter = 20;
  std::vector<double> targets = {100.0, 220.0, 340.0};
  int sweep_starts = 13;
  int sweep_repeats = 5;
  double baseline_pulse_ns = 500.0;
  int delay_cap = 500;
  int delay_repeats = 3;
  bool noisy = true;
  std::uint64_t seed = 0;  ///< 0: derive from the master seed
};

struct FinetuneSettings {
  KernelSchedule schedule = KernelSchedule::defaults();
  FinetuneConfig cfg;
  bool seed_given = false;
};

/// Full pipeline configuration: one JSON document, one master seed. Stage
/// seeds left unset derive from the master so a single --seed reproduces the
/// whole run.
struct RunConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  int jobs = 1;
  std::vector<std::string> stages = {"simulate-device", "gen-dataset", "train",
                                     "finetune",        "eval-oneshot", "wav-sweep",
                                     "delay-bench"};
  DeviceParams device;
  OracleConfig oracle;
  GenConfig dataset;
  TrainConfig train;
  FinetuneSettings finetune;
  EvalSettings eval;

  bool dataset_seed_given = false;
  bool train_seed_given = false;
  bool eval_seed_given = false;

  /// Fill every unset stage seed from the master seed.
  void resolve_seeds() {
    if (!dataset_seed_given) {
      dataset.seed = derive_seed(seed, 101);
    }
    if (!train_seed_given) {
      train.seed = derive_seed(seed, 102);
    }
    if (!finetune.seed_given) {
      finetune.cfg.seed = derive_seed(seed, 103);
    }
    if (!eval_seed_given) {
      eval.seed = derive_seed(seed, 104);
    }
  }

  OneShotOptions oneshot_options() const {
    OneShotOptions o;
    o.n_trials = eval.trials;
    o.seed = eval.seed;
    o.margin_frac = dataset.margin_frac;
    o.central_frac = eval.central_frac;
    o.min_delta_g = eval.min_delta_g;
    o.n_bins = eval.bins;
    o.noisy = eval.noisy;
    o.jobs = jobs;
    return o;
  }

  WavSweepOptions wav_sweep_options() const {
    WavSweepOptions o;
    o.targets = eval.targets;
    o.n_starts = eval.sweep_starts;
    o.repeats = eval.sweep_repeats;
    o.margin_frac = dataset.margin_frac;
    o.wav.max_iter = eval.max_iter;
    o.wav.window = eval.window;
    o.wav.noisy = eval.noisy;
    o.wav.seed = derive_seed(eval.seed, 1);
    return o;
  }

  DelayBenchOptions delay_options() const {
    DelayBenchOptions o;
    o.targets = eval.targets;
    o.baseline_pulse_ns = eval.baseline_pulse_ns;
    o.window = eval.window;
    o.cap = eval.delay_cap;
    o.n_starts = eval.sweep_starts;
    o.repeats = eval.delay_repeats;
    o.margin_frac = dataset.margin_frac;
    o.noisy = eval.noisy;
    o.seed = derive_seed(eval.seed, 2);
    return o;
  }
};

namespace detail {

inline void parse_dataset_section(const json& j, RunConfig& cfg) {
  check_keys(j,
             {"n", "seed", "margin_frac", "min_delta_g", "step_cap_mult", "noisy",
              "max_attempts_per_sample"},
             "dataset");
  cfg.dataset.n = j.value("n", cfg.dataset.n);
  if (j.contains("seed")) {
    cfg.dataset.seed = j.at("seed").get<std::uint64_t>();
    cfg.dataset_seed_given = true;
  }
  cfg.dataset.margin_frac = j.value("margin_frac", cfg.dataset.margin_frac);
  cfg.dataset.min_delta_g = j.value("min_delta_g", cfg.dataset.min_delta_g);
  cfg.dataset.step_cap_mult = j.value("step_cap_mult", cfg.dataset.step_cap_mult);
  cfg.dataset.noisy = j.value("noisy", cfg.dataset.noisy);
  cfg.dataset.max_attempts_per_sample =
      j.value("max_attempts_per_sample", cfg.dataset.max_attempts_per_sample);
}

inline void parse_train_section(const json& j, RunConfig& cfg) {
  check_keys(j,
             {"epochs", "batch_size", "learning_rate", "momentum", "seed", "checkpoint_metric",
              "layer_sizes"},
             "train");
  cfg.train.epochs = j.value("epochs", cfg.train.epochs);
  cfg.train.batch_size = j.value("batch_size", cfg.train.batch_size);
  cfg.train.learning_rate = j.value("learning_rate", cfg.train.learning_rate);
  cfg.train.momentum = j.value("momentum", cfg.train.momentum);
  if (j.contains("seed")) {
    cfg.train.seed = j.at("seed").get<std::uint64_t>();
    cfg.train_seed_given = true;
  }
  if (j.contains("checkpoint_metric")) {
    const std::string metric = j.at("checkpoint_metric").get<std::string>();
    if (metric == "t") {
      cfg.train.metric = CheckpointMetric::kRpdT;
    } else if (metric == "g") {
      cfg.train.metric = CheckpointMetric::kRpdG;
    } else {
      throw std::invalid_argument("train: checkpoint_metric must be 't' or 'g'");
    }
  }
  if (j.contains("layer_sizes")) {
    cfg.train.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  }
}

inline void parse_finetune_section(const json& j, RunConfig& cfg) {
  check_keys(j, {"schedule", "batch_size", "learning_rate", "momentum", "seed"}, "finetune");
  if (j.contains("schedule")) {
    cfg.finetune.schedule = KernelSchedule::parse(j.at("schedule").get<std::string>());
  }
  cfg.finetune.cfg.batch_size = j.value("batch_size", cfg.finetune.cfg.batch_size);
  cfg.finetune.cfg.learning_rate = j.value("learning_rate", cfg.finetune.cfg.learning_rate);
  cfg.finetune.cfg.momentum = j.value("momentum", cfg.finetune.cfg.momentum);
  if (j.contains("seed")) {
    cfg.finetune.cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.finetune.seed_given = true;
  }
}

inline void parse_eval_section(const json& j, RunConfig& cfg) {
  check_keys(j,
             {"trials", "bins", "central_frac", "min_delta_g", "window", "max_iter", "targets",
              "sweep_starts", "sweep_repeats", "baseline_pulse_ns", "delay_cap", "delay_repeats",
              "noisy", "seed"},
             "eval");
  cfg.eval.trials = j.value("trials", cfg.eval.trials);
  cfg.eval.bins = j.value("bins", cfg.eval.bins);
  cfg.eval.central_frac = j.value("central_frac", cfg.eval.central_frac);
  cfg.eval.min_delta_g = j.value("min_delta_g", cfg.eval.min_delta_g);
  cfg.eval.window = j.value("window", cfg.eval.window);
  cfg.eval.max_iter = j.value("max_iter", cfg.eval.max_iter);
  if (j.contains("targets")) {
    cfg.eval.targets = j.at("targets").get<std::vector<double>>();
  }
  cfg.eval.sweep_starts = j.value("sweep_starts", cfg.eval.sweep_starts);
  cfg.eval.sweep_repeats = j.value("sweep_repeats", cfg.eval.sweep_repeats);
  cfg.eval.baseline_pulse_ns = j.value("baseline_pulse_ns", cfg.eval.baseline_pulse_ns);
  cfg.eval.delay_cap = j.value("delay_cap", cfg.eval.delay_cap);
  cfg.eval.delay_repeats = j.value("delay_repeats", cfg.eval.delay_repeats);
  cfg.eval.noisy = j.value("noisy", cfg.eval.noisy);
  if (j.contains("seed")) {
    cfg.eval.seed = j.at("seed").get<std::uint64_t>();
    cfg.eval_seed_given = true;
  }
}

}  // namespace detail

/// Parse and validate a configuration document. Unknown keys anywhere are
/// rejected so typos cannot silently fall back to defaults.
inline RunConfig parse_config(const json& j) {
  check_keys(j, {"seed", "out_dir", "jobs", "stages", "device", "oracle", "dataset", "train",
                 "finetune", "eval"},
             "config");
  RunConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  cfg.jobs = j.value("jobs", cfg.jobs);
  if (cfg.jobs < 1) {
    throw std::invalid_argument("config: jobs must be >= 1");
  }
  if (j.contains("stages")) {
    cfg.stages = j.at("stages").get<std::vector<std::string>>();
  }
  if (j.contains("device")) {
    cfg.device = device_from_json(j.at("device"));
  }
  if (j.contains("oracle")) {
    check_keys(j.at("oracle"), {"tol_g", "max_time"}, "oracle");
    cfg.oracle.tol_g = j.at("oracle").value("tol_g", cfg.oracle.tol_g);
    cfg.oracle.max_time = j.at("oracle").value("max_time", cfg.oracle.max_time);
  }
  if (j.contains("dataset")) {
    detail::parse_dataset_section(j.at("dataset"), cfg);
  }
  if (j.contains("train")) {
    detail::parse_train_section(j.at("train"), cfg);
  }
  if (j.contains("finetune")) {
    detail::parse_finetune_section(j.at("finetune"), cfg);
  }
  if (j.contains("eval")) {
    detail::parse_eval_section(j.at("eval"), cfg);
  }
  cfg.device.validate();
  cfg.oracle.validate(cfg.device);
  cfg.dataset.validate();
  cfg.train.validate();
  cfg.finetune.schedule.validate();
  cfg.finetune.cfg.validate();
  cfg.resolve_seeds();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot open " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("config: " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

inline RunConfig default_config() { return parse_config(json::object()); }

}  // namespace memprog
