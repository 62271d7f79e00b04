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

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "memprog/config.hpp"
#include "memprog/eval.hpp"
#include "memprog/finetune.hpp"
#include "memprog/serialize.hpp"

namespace memprog {

struct ManifestEntry {
  std::string path;  ///< relative to the output directory
  std::string hash;
  std::string stage;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  const ManifestEntry* find(const std::string& path) const {
    for (const ManifestEntry& e : entries) {
      if (e.path == path) {
        return &e;
      }
    }
    return nullptr;
  }

  void upsert(ManifestEntry entry) {
    for (ManifestEntry& e : entries) {
      if (e.path == entry.path) {
        e = std::move(entry);
        return;
      }
    }
    entries.push_back(std::move(entry));
  }

  json to_json() const {
    json arr = json::array();
    for (const ManifestEntry& e : entries) {
      arr.push_back({{"path", e.path}, {"hash", e.hash}, {"stage", e.stage}});
    }
    return json{{"format", "memprog-manifest-1"}, {"entries", arr}};
  }

  static Manifest from_json(const json& j) {
    Manifest m;
    for (const json& e : j.at("entries")) {
      m.entries.push_back({e.at("path").get<std::string>(), e.at("hash").get<std::string>(),
                           e.at("stage").get<std::string>()});
    }
    return m;
  }
};

// ---------------------------------------------------------------------------
// artifact writers shared by the pipeline and the standalone subcommands
// ---------------------------------------------------------------------------

inline void write_switching_csv(const std::vector<std::vector<double>>& traces,
                                const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("device_id,pulse_index,conductance_uS");
  for (std::size_t d = 0; d < traces.size(); ++d) {
    for (std::size_t i = 0; i < traces[d].size(); ++i) {
      csv.field(static_cast<std::int64_t>(d))
          .field(static_cast<std::int64_t>(i))
          .field(traces[d][i]);
      csv.end_row();
    }
  }
}

inline void write_train_history_csv(const std::vector<EpochStats>& history,
                                    const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("epoch,train_mse,val_rpd");
  for (const EpochStats& e : history) {
    csv.field(e.epoch).field(e.train_mse).field(e.val_rpd);
    csv.end_row();
  }
}

inline void write_finetune_history_csv(const std::vector<StageEpochStats>& history,
                                       const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("stage,kernel,epoch,train_mse,val_rpd_g");
  for (const StageEpochStats& e : history) {
    csv.field(e.stage).field(e.kernel).field(e.epoch).field(e.train_mse).field(e.val_rpd_g);
    csv.end_row();
  }
}

inline void write_oneshot_trials_csv(const SweepReport& report,
                                     const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("trial,g_start_uS,g_target_uS,t_pred_ns,g_end_uS,rpd");
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    const OneShotTrial& t = report.trials[i];
    csv.field(static_cast<std::int64_t>(i))
        .field(t.g_start)
        .field(t.g_target)
        .field(t.t_pred_ns)
        .field(t.g_end)
        .field(t.rpd);
    csv.end_row();
  }
}

inline void write_oneshot_cells_csv(const SweepReport& report,
                                    const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("start_bin,target_bin,g_start_lo_uS,g_target_lo_uS,mean_rpd,std_rpd,count");
  const double bin_w = (report.range_hi - report.range_lo) / report.n_bins;
  for (const SweepCell& c : report.cells) {
    csv.field(c.start_bin)
        .field(c.target_bin)
        .field(report.range_lo + c.start_bin * bin_w)
        .field(report.range_lo + c.target_bin * bin_w)
        .field(c.mean_rpd)
        .field(c.std_rpd)
        .field(c.count);
    csv.end_row();
  }
}

inline json oneshot_summary_json(const SweepReport& report, const std::string& predictor,
                                 const std::string& predictor_hash, std::uint64_t seed) {
  return json{{"predictor", predictor},
              {"predictor_hash", predictor_hash},
              {"seed", seed},
              {"n_trials", report.trials.size()},
              {"range_lo_uS", report.range_lo},
              {"range_hi_uS", report.range_hi},
              {"mean_rpd", report.mean_rpd},
              {"frac_within_50pct", report.frac_within_50pct}};
}

inline void write_wav_trajectory_csv(const WavTrajectory& traj,
                                     const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("iteration,t_pred_ns,g_after_uS");
  for (const WavIteration& it : traj.iterations) {
    csv.field(it.iteration).field(it.t_pred_ns).field(it.g_after);
    csv.end_row();
  }
}

inline void write_wav_sweep_csv(const WavSweepReport& report,
                                const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header(
      "g_target_uS,g_start_uS,mean_converged_uS,std_converged_uS,mean_iters_to_window,"
      "frac_within_10_iters,repeats");
  for (const WavSweepCell& c : report.cells) {
    csv.field(c.g_target)
        .field(c.g_start)
        .field(c.mean_converged)
        .field(c.std_converged)
        .field(c.mean_iters_to_window)
        .field(c.frac_within_10_iters)
        .field(c.repeats);
    csv.end_row();
  }
}

inline void write_wav_trajectories_csv(const WavSweepReport& report,
                                       const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("g_target_uS,g_start_uS,run,iteration,t_pred_ns,g_after_uS");
  std::size_t run = 0;
  for (const WavTrajectory& traj : report.trajectories) {
    for (const WavIteration& it : traj.iterations) {
      csv.field(traj.g_target)
          .field(traj.g_start)
          .field(static_cast<std::int64_t>(run))
          .field(it.iteration)
          .field(it.t_pred_ns)
          .field(it.g_after);
      csv.end_row();
    }
    ++run;
  }
}

inline void write_delay_csv(const std::vector<DelayRow>& rows,
                            const std::filesystem::path& path) {
  CsvWriter csv(path);
  csv.header("g_target_uS,method,mean_verify_iterations,mean_cumulative_pulse_ns,runs,nonconverged");
  for (const DelayRow& r : rows) {
    csv.field(r.g_target)
        .field(r.method)
        .field(r.mean_iterations)
        .field(r.mean_pulse_ns)
        .field(r.runs)
        .field(r.nonconverged);
    csv.end_row();
  }
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

/// Stage-sequential pipeline over one output directory. Every produced file
/// is content-hashed into out/manifest.json; a stage whose expected artifacts
/// already match the manifest is skipped, so reruns are idempotent. A failing
/// stage leaves the manifest of the completed stages behind.
class Pipeline {
public:
  Pipeline(RunConfig cfg, std::ostream& log = std::cout)
      : cfg_(std::move(cfg)), out_dir_(cfg_.out_dir), log_(log) {}

  static const std::vector<std::string>& known_stages() {
    static const std::vector<std::string> stages = {
        "simulate-device", "gen-dataset", "train",      "finetune",
        "eval-oneshot",    "wav-sweep",   "delay-bench"};
    return stages;
  }

  /// Run the configured stages in pipeline order. Returns the manifest.
  Manifest run() {
    std::filesystem::create_directories(out_dir_);
    load_manifest();
    for (const std::string& stage : cfg_.stages) {
      run_stage(stage);
    }
    return manifest_;
  }

  const Manifest& manifest() const { return manifest_; }

private:
  using StageFn = void (Pipeline::*)();

  void run_stage(const std::string& stage) {
    static const std::map<std::string, std::pair<StageFn, std::vector<std::string> (*)()> >
        stages = {
            {"simulate-device",
             {&Pipeline::stage_simulate, [] { return std::vector<std::string>{"switching_curve.csv"}; }}},
            {"gen-dataset",
             {&Pipeline::stage_gen_dataset,
              [] { return std::vector<std::string>{"dataset.meta.json", "dataset.samples.bin"}; }}},
            {"train",
             {&Pipeline::stage_train,
              [] { return std::vector<std::string>{"model_scratch.json", "train_history.csv"}; }}},
            {"finetune",
             {&Pipeline::stage_finetune,
              [] {
                return std::vector<std::string>{"model_finetuned.json", "finetune_history.csv"};
              }}},
            {"eval-oneshot",
             {&Pipeline::stage_eval_oneshot,
              [] {
                return std::vector<std::string>{
                    "oneshot_finetuned_trials.csv", "oneshot_finetuned_cells.csv",
                    "oneshot_finetuned_summary.json", "oneshot_scratch_trials.csv",
                    "oneshot_scratch_cells.csv",      "oneshot_scratch_summary.json",
                    "oneshot_oracle_trials.csv",      "oneshot_oracle_cells.csv",
                    "oneshot_oracle_summary.json"};
              }}},
            {"wav-sweep",
             {&Pipeline::stage_wav_sweep,
              [] {
                return std::vector<std::string>{"wav_sweep.csv", "wav_trajectories.csv",
                                                "wav_sweep_summary.json"};
              }}},
            {"delay-bench",
             {&Pipeline::stage_delay_bench,
              [] {
                return std::vector<std::string>{"delay_bench.csv", "delay_bench_summary.json"};
              }}},
        };

    const auto it = stages.find(stage);
    if (it == stages.end()) {
      throw std::invalid_argument("pipeline: unknown stage '" + stage + "'");
    }
    const std::vector<std::string> expected = it->second.second();
    if (stage_is_current(expected)) {
      log_ << "[pipeline] " << stage << ": up to date, skipped\n";
      return;
    }
    log_ << "[pipeline] " << stage << ": running\n";
    try {
      (this->*(it->second.first))();
    } catch (const std::exception& e) {
      save_manifest();
      throw std::runtime_error("pipeline: stage '" + stage + "' failed: " + e.what());
    }
    for (const std::string& rel : expected) {
      manifest_.upsert({rel, file_hash(out_dir_ / rel), stage});
    }
    save_manifest();
  }

  bool stage_is_current(const std::vector<std::string>& expected) const {
    for (const std::string& rel : expected) {
      const ManifestEntry* entry = manifest_.find(rel);
      if (entry == nullptr) {
        return false;
      }
      const std::filesystem::path path = out_dir_ / rel;
      if (!std::filesystem::exists(path) || file_hash(path) != entry->hash) {
        return false;
      }
    }
    return true;
  }

  void load_manifest() {
    const std::filesystem::path path = out_dir_ / "manifest.json";
    if (!std::filesystem::exists(path)) {
      return;
    }
    std::ifstream in(path);
    json j;
    try {
      in >> j;
      manifest_ = Manifest::from_json(j);
    } catch (const json::exception&) {
      manifest_ = Manifest{};  // unreadable manifest: treat as a fresh directory
    }
  }

  void save_manifest() const {
    std::ofstream out(out_dir_ / "manifest.json");
    if (!out) {
      throw std::runtime_error("pipeline: cannot write manifest in " + out_dir_.string());
    }
    out << manifest_.to_json().dump(2) << '\n';
  }

  // -- stages ---------------------------------------------------------------

  void stage_simulate() {
    const auto traces = switching_curves(cfg_.device, 6000, 10, Polarity::kSet,
                                         cfg_.dataset.noisy, derive_seed(cfg_.seed, 100));
    write_switching_csv(traces, out_dir_ / "switching_curve.csv");
  }

  void stage_gen_dataset() {
    GenConfig gen = cfg_.dataset;
    gen.jobs = cfg_.jobs;
    const Dataset ds = generate_dataset(cfg_.device, gen);
    save_dataset(ds, out_dir_ / "dataset");
  }

  void stage_train() {
    const Dataset ds = load_dataset(out_dir_ / "dataset");
    const TrainResult result = train(ds, cfg_.train);
    json provenance;
    provenance["dataset_hash"] = dataset_hash(ds);
    provenance["train"] = {{"epochs", cfg_.train.epochs},
                           {"batch_size", cfg_.train.batch_size},
                           {"learning_rate", cfg_.train.learning_rate},
                           {"momentum", cfg_.train.momentum},
                           {"seed", cfg_.train.seed},
                           {"checkpoint_metric",
                            cfg_.train.metric == CheckpointMetric::kRpdT ? "t" : "g"},
                           {"best_epoch", result.best_epoch},
                           {"best_val_rpd", result.best_val_rpd}};
    save_model(result.model, result.norm, provenance, out_dir_ / "model_scratch.json");
    write_train_history_csv(result.history, out_dir_ / "train_history.csv");
  }

  void stage_finetune() {
    const Dataset ds = load_dataset(out_dir_ / "dataset");
    const LoadedModel scratch = load_model(out_dir_ / "model_scratch.json");
    const FinetuneResult result =
        finetune(scratch.model, ds, cfg_.finetune.schedule, cfg_.finetune.cfg);
    json provenance = scratch.provenance;
    provenance["finetune"] = {{"schedule", cfg_.finetune.schedule.to_string()},
                              {"batch_size", cfg_.finetune.cfg.batch_size},
                              {"learning_rate", cfg_.finetune.cfg.learning_rate},
                              {"momentum", cfg_.finetune.cfg.momentum},
                              {"seed", cfg_.finetune.cfg.seed},
                              {"best_stage", result.best_stage},
                              {"best_epoch", result.best_epoch},
                              {"best_val_rpd_g", result.best_val_rpd_g}};
    save_model(result.model, ds.norm, provenance, out_dir_ / "model_finetuned.json");
    write_finetune_history_csv(result.history, out_dir_ / "finetune_history.csv");
  }

  void eval_one_predictor(const PulsePredictor& predictor, const std::string& tag,
                          const std::string& predictor_hash) {
    const OneShotOptions opt = cfg_.oneshot_options();
    const SweepReport report = one_shot_eval(predictor, cfg_.device, opt);
    write_oneshot_trials_csv(report, out_dir_ / ("oneshot_" + tag + "_trials.csv"));
    write_oneshot_cells_csv(report, out_dir_ / ("oneshot_" + tag + "_cells.csv"));
    std::ofstream out(out_dir_ / ("oneshot_" + tag + "_summary.json"));
    out << oneshot_summary_json(report, tag, predictor_hash, opt.seed).dump(2) << '\n';
  }

  void stage_eval_oneshot() {
    const LoadedModel finetuned = load_model(out_dir_ / "model_finetuned.json");
    const LoadedModel scratch = load_model(out_dir_ / "model_scratch.json");
    eval_one_predictor(MlpPredictor(finetuned.model, finetuned.norm, "finetuned"), "finetuned",
                       file_hash(out_dir_ / "model_finetuned.json"));
    eval_one_predictor(MlpPredictor(scratch.model, scratch.norm, "scratch"), "scratch",
                       file_hash(out_dir_ / "model_scratch.json"));
    eval_one_predictor(OraclePredictor(cfg_.device, cfg_.oracle), "oracle", "-");
  }

  void stage_wav_sweep() {
    const LoadedModel finetuned = load_model(out_dir_ / "model_finetuned.json");
    const MlpPredictor predictor(finetuned.model, finetuned.norm, "finetuned");
    const WavSweepOptions opt = cfg_.wav_sweep_options();
    const WavSweepReport report = wav_sweep(predictor, cfg_.device, opt);
    write_wav_sweep_csv(report, out_dir_ / "wav_sweep.csv");
    write_wav_trajectories_csv(report, out_dir_ / "wav_trajectories.csv");
    json summary;
    summary["predictor"] = "finetuned";
    summary["predictor_hash"] = file_hash(out_dir_ / "model_finetuned.json");
    summary["seed"] = opt.wav.seed;
    summary["targets"] = opt.targets;
    summary["window_uS"] = opt.wav.window;
    summary["max_iter"] = opt.wav.max_iter;
    std::ofstream out(out_dir_ / "wav_sweep_summary.json");
    out << summary.dump(2) << '\n';
  }

  void stage_delay_bench() {
    const LoadedModel finetuned = load_model(out_dir_ / "model_finetuned.json");
    const MlpPredictor predictor(finetuned.model, finetuned.norm, "finetuned");
    const DelayBenchOptions opt = cfg_.delay_options();
    const auto rows = delay_benchmark(predictor, cfg_.device, opt);
    write_delay_csv(rows, out_dir_ / "delay_bench.csv");
    json summary;
    summary["predictor"] = "finetuned";
    summary["predictor_hash"] = file_hash(out_dir_ / "model_finetuned.json");
    summary["seed"] = opt.seed;
    summary["baseline_pulse_ns"] = opt.baseline_pulse_ns;
    summary["window_uS"] = opt.window;
    json rows_json = json::array();
    for (const DelayRow& r : rows) {
      rows_json.push_back({{"g_target_uS", r.g_target},
                           {"method", r.method},
                           {"mean_verify_iterations", r.mean_iterations},
                           {"mean_cumulative_pulse_ns", r.mean_pulse_ns},
                           {"runs", r.runs},
                           {"nonconverged", r.nonconverged}});
    }
    summary["rows"] = rows_json;
    std::ofstream out(out_dir_ / "delay_bench_summary.json");
    out << summary.dump(2) << '\n';
  }

  RunConfig cfg_;
  std::filesystem::path out_dir_;
  std::ostream& log_;
  Manifest manifest_;
};

}  // namespace memprog
