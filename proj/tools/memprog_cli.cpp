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

// Command-line front end for the device simulator, dataset generator, pulse
// predictor training/fine-tuning and the deployment benchmarks. One JSON
// config document (see README) drives everything; flags override config keys
// one-to-one. Exit codes: 0 success, 1 usage error, 2 stage failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memprog/config.hpp"
#include "memprog/pipeline.hpp"

namespace {

using namespace memprog;
namespace fs = std::filesystem;

struct GlobalArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
};

RunConfig make_config(const GlobalArgs& g) {
  RunConfig cfg = g.config_path.empty() ? default_config() : load_config(g.config_path);
  if (g.seed_given) {
    cfg.seed = g.seed;
    cfg.resolve_seeds();  // re-derive every stage seed not pinned in the config
  }
  if (!g.out_dir.empty()) {
    cfg.out_dir = g.out_dir;
  }
  if (g.jobs > 0) {
    cfg.jobs = g.jobs;
  }
  return cfg;
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  return cfg.out_dir;
}

MlpPredictor load_predictor(const fs::path& path, const std::string& label) {
  const LoadedModel loaded = load_model(path);
  return MlpPredictor(loaded.model, loaded.norm, label);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"memristor pulse-predictor toolkit: simulate, generate, train, evaluate"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  GlobalArgs global;
  app.add_option("--config", global.config_path, "JSON configuration file");
  app.add_option("--out", global.out_dir, "output directory (overrides config)");
  app.add_option("--seed", global.seed, "master seed (overrides config)")
      ->each([&global](const std::string&) { global.seed_given = true; });
  app.add_option("--jobs", global.jobs, "worker cap for parallel stages");

  // --- simulate-device -----------------------------------------------------
  auto* sim = app.add_subcommand("simulate-device", "emit switching-curve CSV for a pulse train");
  int sim_pulses = 6000;
  int sim_devices = 10;
  std::string sim_polarity = "set";
  bool sim_noise_free = false;
  sim->add_option("--pulses", sim_pulses, "pulses per device");
  sim->add_option("--devices", sim_devices, "number of devices");
  sim->add_option("--polarity", sim_polarity, "pulse polarity")
      ->check(CLI::IsMember({"set", "reset"}));
  sim->add_flag("--noise-free", sim_noise_free, "disable cycle-to-cycle noise");

  // --- gen-dataset ----------------------------------------------------------
  auto* gen = app.add_subcommand("gen-dataset", "generate the pulse-time training corpus");
  int gen_n = 0;
  std::string gen_name = "dataset";
  bool gen_csv = false;
  gen->add_option("--n", gen_n, "number of samples (overrides config)");
  gen->add_option("--name", gen_name, "output file prefix");
  gen->add_flag("--csv", gen_csv, "also write a per-sample CSV (histories elided)");

  // --- train -----------------------------------------------------------------
  auto* tr = app.add_subcommand("train", "train the pulse predictor with MSE on pulse times");
  int tr_epochs = 0;
  double tr_lr = 0.0;
  int tr_batch = 0;
  std::uint64_t tr_seed = 0;
  bool tr_seed_given = false;
  std::string tr_metric;
  std::string tr_dataset;
  tr->add_option("--epochs", tr_epochs, "training epochs");
  tr->add_option("--lr", tr_lr, "learning rate");
  tr->add_option("--batch", tr_batch, "minibatch size");
  tr->add_option("--seed", tr_seed, "training seed")
      ->each([&tr_seed_given](const std::string&) { tr_seed_given = true; });
  tr->add_option("--checkpoint-metric", tr_metric, "validation metric for checkpointing")
      ->check(CLI::IsMember({"t", "g"}));
  tr->add_option("--dataset", tr_dataset, "dataset prefix (default <out>/dataset)");

  // --- finetune ----------------------------------------------------------------
  auto* ft = app.add_subcommand("finetune",
                                "fine-tune on conductance targets through recorded histories");
  std::string ft_schedule;
  std::string ft_dataset;
  std::string ft_model;
  ft->add_option("--schedule", ft_schedule, "kernel schedule, e.g. 1001:50,101:50,11:50,1:50");
  ft->add_option("--dataset", ft_dataset, "dataset prefix (default <out>/dataset)");
  ft->add_option("--model", ft_model, "input checkpoint (default <out>/model_scratch.json)");

  // --- eval-oneshot ----------------------------------------------------------------
  auto* ev = app.add_subcommand("eval-oneshot", "one-shot programming benchmark in simulation");
  std::string ev_model;
  std::string ev_predictor = "mlp";
  std::string ev_tag = "eval";
  int ev_trials = 0;
  ev->add_option("--model", ev_model, "checkpoint (default <out>/model_finetuned.json)");
  ev->add_option("--predictor", ev_predictor, "predictor kind")
      ->check(CLI::IsMember({"mlp", "oracle"}));
  ev->add_option("--tag", ev_tag, "output file tag");
  ev->add_option("--trials", ev_trials, "number of trials (overrides config)");

  // --- wav ---------------------------------------------------------------------------
  auto* wav = app.add_subcommand("wav", "single write-and-verify trajectory");
  double wav_start = 225.0;
  double wav_target = 220.0;
  std::string wav_model;
  wav->add_option("--g-start", wav_start, "start conductance, uS")->required();
  wav->add_option("--g-target", wav_target, "target conductance, uS")->required();
  wav->add_option("--model", wav_model, "checkpoint (default <out>/model_finetuned.json)");

  // --- wav-sweep ------------------------------------------------------------------------
  auto* sweep = app.add_subcommand("wav-sweep", "write-and-verify sweep over start/target grid");
  std::string sweep_model;
  sweep->add_option("--model", sweep_model, "checkpoint (default <out>/model_finetuned.json)");

  // --- delay-bench -------------------------------------------------------------------------
  auto* delay = app.add_subcommand("delay-bench",
                                   "programming-delay comparison against a fixed-pulse baseline");
  std::string delay_model;
  delay->add_option("--model", delay_model, "checkpoint (default <out>/model_finetuned.json)");

  // --- pipeline ---------------------------------------------------------------------------
  auto* pipe = app.add_subcommand("pipeline", "run the configured stages in order");
  std::string pipe_stages;
  pipe->add_option("--stages", pipe_stages, "comma-separated stage list (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    RunConfig cfg = make_config(global);
    const fs::path out = ensure_out_dir(cfg);

    if (sim->parsed()) {
      const Polarity pol = sim_polarity == "set" ? Polarity::kSet : Polarity::kReset;
      const auto traces = switching_curves(cfg.device, sim_pulses, sim_devices, pol,
                                           !sim_noise_free, derive_seed(cfg.seed, 100));
      const fs::path path = out / "switching_curve.csv";
      write_switching_csv(traces, path);
      std::cout << "wrote " << path.string() << "\n";
    } else if (gen->parsed()) {
      GenConfig gen_cfg = cfg.dataset;
      if (gen_n > 0) {
        gen_cfg.n = gen_n;
      }
      gen_cfg.jobs = cfg.jobs;
      const Dataset ds = generate_dataset(cfg.device, gen_cfg);
      save_dataset(ds, out / gen_name);
      if (gen_csv) {
        export_dataset_csv(ds, out / (gen_name + ".samples.csv"));
      }
      std::cout << "wrote " << (out / gen_name).string() << ".{meta.json,samples.bin}"
                << " (" << ds.samples.size() << " samples, " << ds.rejected << " rejected)\n";
    } else if (tr->parsed()) {
      if (tr_epochs > 0) cfg.train.epochs = tr_epochs;
      if (tr_lr > 0.0) cfg.train.learning_rate = tr_lr;
      if (tr_batch > 0) cfg.train.batch_size = tr_batch;
      if (tr_seed_given) cfg.train.seed = tr_seed;
      if (tr_metric == "t") cfg.train.metric = CheckpointMetric::kRpdT;
      if (tr_metric == "g") cfg.train.metric = CheckpointMetric::kRpdG;
      const fs::path prefix = tr_dataset.empty() ? out / "dataset" : fs::path(tr_dataset);
      const Dataset ds = load_dataset(prefix);
      const TrainResult result = train(ds, cfg.train);
      json provenance;
      provenance["dataset_hash"] = dataset_hash(ds);
      provenance["train"] = {{"epochs", cfg.train.epochs},
                             {"batch_size", cfg.train.batch_size},
                             {"learning_rate", cfg.train.learning_rate},
                             {"momentum", cfg.train.momentum},
                             {"seed", cfg.train.seed},
                             {"checkpoint_metric",
                              cfg.train.metric == CheckpointMetric::kRpdT ? "t" : "g"},
                             {"best_epoch", result.best_epoch},
                             {"best_val_rpd", result.best_val_rpd}};
      save_model(result.model, result.norm, provenance, out / "model_scratch.json");
      write_train_history_csv(result.history, out / "train_history.csv");
      std::cout << "best validation RPD " << format_number(result.best_val_rpd) << " at epoch "
                << result.best_epoch << "; wrote " << (out / "model_scratch.json").string()
                << "\n";
    } else if (ft->parsed()) {
      if (!ft_schedule.empty()) {
        cfg.finetune.schedule = KernelSchedule::parse(ft_schedule);
      }
      const fs::path prefix = ft_dataset.empty() ? out / "dataset" : fs::path(ft_dataset);
      const fs::path model_path =
          ft_model.empty() ? out / "model_scratch.json" : fs::path(ft_model);
      const Dataset ds = load_dataset(prefix);
      const LoadedModel scratch = load_model(model_path);
      const FinetuneResult result =
          finetune(scratch.model, ds, cfg.finetune.schedule, cfg.finetune.cfg);
      json provenance = scratch.provenance;
      provenance["finetune"] = {{"schedule", cfg.finetune.schedule.to_string()},
                                {"batch_size", cfg.finetune.cfg.batch_size},
                                {"learning_rate", cfg.finetune.cfg.learning_rate},
                                {"momentum", cfg.finetune.cfg.momentum},
                                {"seed", cfg.finetune.cfg.seed},
                                {"best_stage", result.best_stage},
                                {"best_epoch", result.best_epoch},
                                {"best_val_rpd_g", result.best_val_rpd_g}};
      save_model(result.model, ds.norm, provenance, out / "model_finetuned.json");
      write_finetune_history_csv(result.history, out / "finetune_history.csv");
      std::cout << "best validation RPD_G " << format_number(result.best_val_rpd_g)
                << " at stage " << result.best_stage << " epoch " << result.best_epoch
                << "; wrote " << (out / "model_finetuned.json").string() << "\n";
    } else if (ev->parsed()) {
      OneShotOptions opt = cfg.oneshot_options();
      if (ev_trials > 0) {
        opt.n_trials = ev_trials;
      }
      std::unique_ptr<PulsePredictor> predictor;
      std::string predictor_hash = "-";
      if (ev_predictor == "oracle") {
        predictor = std::make_unique<OraclePredictor>(cfg.device, cfg.oracle);
        if (ev_tag == "eval") ev_tag = "oracle";
      } else {
        const fs::path model_path =
            ev_model.empty() ? out / "model_finetuned.json" : fs::path(ev_model);
        predictor = std::make_unique<MlpPredictor>(load_predictor(model_path, ev_tag));
        predictor_hash = file_hash(model_path);
      }
      const SweepReport report = one_shot_eval(*predictor, cfg.device, opt);
      write_oneshot_trials_csv(report, out / ("oneshot_" + ev_tag + "_trials.csv"));
      write_oneshot_cells_csv(report, out / ("oneshot_" + ev_tag + "_cells.csv"));
      std::ofstream summary(out / ("oneshot_" + ev_tag + "_summary.json"));
      summary << oneshot_summary_json(report, ev_tag, predictor_hash, opt.seed).dump(2) << '\n';
      std::cout << "mean RPD " << format_number(report.mean_rpd) << ", frac within 50% "
                << format_number(report.frac_within_50pct) << " over " << report.trials.size()
                << " trials\n";
    } else if (wav->parsed()) {
      const fs::path model_path =
          wav_model.empty() ? out / "model_finetuned.json" : fs::path(wav_model);
      const MlpPredictor predictor = load_predictor(model_path, "wav");
      WavOptions opt;
      opt.max_iter = cfg.eval.max_iter;
      opt.window = cfg.eval.window;
      opt.noisy = cfg.eval.noisy;
      opt.seed = derive_seed(cfg.eval.seed, 3);
      const WavTrajectory traj =
          write_and_verify(predictor, cfg.device, wav_start, wav_target, opt);
      write_wav_trajectory_csv(traj, out / "wav_trajectory.csv");
      std::cout << "converged at " << format_number(traj.converged_g) << " uS after "
                << traj.iterations.size() << " iterations";
      if (traj.iters_to_window.has_value()) {
        std::cout << " (entered the +/-" << format_number(opt.window)
                  << " uS window at iteration " << *traj.iters_to_window << ")";
      }
      std::cout << "\n";
    } else if (sweep->parsed()) {
      const fs::path model_path =
          sweep_model.empty() ? out / "model_finetuned.json" : fs::path(sweep_model);
      const MlpPredictor predictor = load_predictor(model_path, "finetuned");
      const WavSweepReport report = wav_sweep(predictor, cfg.device, cfg.wav_sweep_options());
      write_wav_sweep_csv(report, out / "wav_sweep.csv");
      write_wav_trajectories_csv(report, out / "wav_trajectories.csv");
      std::cout << "wrote " << (out / "wav_sweep.csv").string() << " (" << report.cells.size()
                << " cells)\n";
    } else if (delay->parsed()) {
      const fs::path model_path =
          delay_model.empty() ? out / "model_finetuned.json" : fs::path(delay_model);
      const MlpPredictor predictor = load_predictor(model_path, "finetuned");
      const auto rows = delay_benchmark(predictor, cfg.device, cfg.delay_options());
      write_delay_csv(rows, out / "delay_bench.csv");
      for (const DelayRow& r : rows) {
        std::cout << "target " << format_number(r.g_target) << " uS, " << r.method << ": "
                  << format_number(r.mean_iterations) << " verify iterations, "
                  << format_number(r.mean_pulse_ns) << " ns cumulative pulse\n";
      }
    } else if (pipe->parsed()) {
      if (!pipe_stages.empty()) {
        cfg.stages.clear();
        std::size_t pos = 0;
        while (pos <= pipe_stages.size()) {
          const std::size_t comma = std::min(pipe_stages.find(',', pos), pipe_stages.size());
          cfg.stages.push_back(pipe_stages.substr(pos, comma - pos));
          if (comma == pipe_stages.size()) {
            break;
          }
          pos = comma + 1;
        }
      }
      Pipeline pipeline(cfg);
      pipeline.run();
      std::cout << "pipeline complete; manifest at " << (out / "manifest.json").string() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
