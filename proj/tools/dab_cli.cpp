// Copyright 2026 The dabkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: scene simulation, single-scene enhancement,
// batch experiments, the distance study, gamma sweeps and toy training.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dab/experiment.hpp"
#include "dab/wav.hpp"

namespace fs = std::filesystem;

namespace {

struct ExperimentFlags {
  std::string config;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  int jobs = 1;
  bool dump = false;
  int n_scenes = 10;
  int num_mics = 16;
  std::string noise_kind = "diffuse";
  std::string array_kind = "adhoc";
  std::vector<double> snrato{10.0};
  std::vector<std::string> algorithms;
  std::vector<std::string> sync_modes{"estimated"};
  double gamma = 0.5;
  int fixed_n = 0;
  int dims = 0;
  double sigma = 1.0;
  std::string estimator = "oracle";
  double speech_s = 3.0;
  std::string noise_type;

  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app) {
    opts["config"] = app->add_option("--config", config, "JSON experiment config");
    opts["seed"] = app->add_option("--seed", seed, "master seed");
    opts["out-dir"] = app->add_option("--out-dir", out_dir, "output directory");
    opts["jobs"] = app->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    opts["dump"] = app->add_flag("--dump", dump, "write per-scene artifacts");
    opts["n-scenes"] = app->add_option("--n-scenes", n_scenes, "scenes per SNRatO");
    opts["M"] = app->add_option("-M,--mics", num_mics, "microphones per scene");
    opts["noise-kind"] = app->add_option("--noise-kind", noise_kind, "diffuse | point");
    opts["array-kind"] = app->add_option("--array-kind", array_kind, "adhoc | linear");
    opts["snrato"] = app->add_option("--snrato", snrato, "SNRatO values in dB")->delimiter(',');
    opts["algorithms"] = app->add_option("--algorithms", algorithms,
                                         "1best all fixedN autoN softN learningN random")
                             ->delimiter(',');
    opts["sync-modes"] = app->add_option("--sync-modes", sync_modes,
                                         "none ground_truth estimated")
                             ->delimiter(',');
    opts["gamma"] = app->add_option("--gamma", gamma, "selection threshold in [0, 1]");
    opts["N"] = app->add_option("--N", fixed_n, "fixed-N channel count");
    opts["J"] = app->add_option("--J", dims, "embedding dimension");
    opts["sigma"] = app->add_option("--sigma", sigma, "affinity width");
    opts["estimator"] = app->add_option("--estimator", estimator, "oracle | mlp:<dir>");
    opts["speech-s"] = app->add_option("--speech-s", speech_s, "utterance length in seconds");
    opts["noise-type"] = app->add_option("--noise-type", noise_type,
                                         "white | speech-shaped | babble | factory");
  }

  bool set(const std::string& name) const { return opts.at(name)->count() > 0; }

  dab::ExperimentConfig build() const {
    nlohmann::json j = nlohmann::json::object();
    if (!config.empty()) {
      std::ifstream is(config);
      if (!is) throw dab::Error("cannot open config " + config);
      try {
        is >> j;
      } catch (const nlohmann::json::exception& e) {
        throw dab::Error("malformed config " + config + ": " + e.what());
      }
    }
    if (set("seed")) j["master_seed"] = seed;
    if (set("jobs")) j["jobs"] = jobs;
    if (set("n-scenes")) j["n_scenes"] = n_scenes;
    if (set("M")) j["M"] = num_mics;
    if (set("noise-kind")) j["noise_kind"] = noise_kind;
    if (set("array-kind")) j["array_kind"] = array_kind;
    if (set("snrato")) j["snrato_db"] = snrato;
    if (set("algorithms")) j["algorithms"] = algorithms;
    if (set("sync-modes")) j["sync_modes"] = sync_modes;
    if (set("gamma")) j["gamma"] = gamma;
    if (set("N")) j["N"] = fixed_n;
    if (set("J")) j["J"] = dims;
    if (set("sigma")) j["sigma"] = sigma;
    if (set("estimator")) j["estimator"] = estimator;
    if (set("speech-s")) j["speech_s"] = speech_s;
    if (set("noise-type")) j["noise_type"] = noise_type;
    if (dump) j["dump_dir"] = (fs::path(out_dir) / "scenes").string();
    return dab::experiment_config_from_json(j);
  }
};

void report_failures(const std::vector<dab::SceneFailure>& failures, int total) {
  for (const auto& f : failures)
    std::cerr << "scene " << f.scene << " (seed " << f.seed << ", snrato " << f.snrato_db
              << " dB) failed: " << f.message << "\n";
  if (!failures.empty()) std::cerr << failures.size() << " of " << total << " scenes failed\n";
}

nlohmann::json failures_json(const std::vector<dab::SceneFailure>& failures) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& f : failures)
    j.push_back({{"scene", f.scene}, {"seed", f.seed}, {"snrato_db", f.snrato_db},
                 {"message", f.message}});
  return j;
}

dab::FloorShape floor_shape_from_string(const std::string& s) {
  if (s == "square") return dab::FloorShape::kSquare;
  if (s == "rectangle") return dab::FloorShape::kRectangle;
  if (s == "circle") return dab::FloorShape::kCircle;
  throw dab::Error("unknown floor shape '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ad-hoc microphone array enhancement toolkit"};
  app.require_subcommand(1);

  // simulate / enhance share the single-scene flags.
  std::uint64_t scene_seed_flag = 1;
  std::string scene_out = "scene";
  int scene_mics = 16;
  std::string scene_noise_kind = "diffuse", scene_array_kind = "adhoc", scene_noise_type;
  double scene_snr = 10.0, scene_speech_s = 3.0;
  auto add_scene_flags = [&](CLI::App* sub) {
    sub->add_option("--seed", scene_seed_flag, "scene seed");
    sub->add_option("--out-dir", scene_out, "output directory");
    sub->add_option("-M,--mics", scene_mics, "microphones");
    sub->add_option("--noise-kind", scene_noise_kind, "diffuse | point");
    sub->add_option("--array-kind", scene_array_kind, "adhoc | linear");
    sub->add_option("--noise-type", scene_noise_type, "white | speech-shaped | babble | factory");
    sub->add_option("--snrato", scene_snr, "SNRatO in dB");
    sub->add_option("--speech-s", scene_speech_s, "utterance length in seconds");
  };
  auto make_spec = [&] {
    dab::SceneSpec spec;
    spec.scene.num_mics = scene_mics;
    spec.scene.noise_kind = dab::noise_kind_from_string(scene_noise_kind);
    spec.scene.array_kind = dab::array_kind_from_string(scene_array_kind);
    spec.scene.snrato_db = scene_snr;
    spec.speech_s = scene_speech_s;
    if (!scene_noise_type.empty()) spec.noise_type = dab::noise_type_from_string(scene_noise_type);
    return spec;
  };

  auto* simulate = app.add_subcommand("simulate", "synthesize one scene and write its WAVs");
  add_scene_flags(simulate);

  auto* enhance = app.add_subcommand("enhance", "synthesize one scene and enhance it");
  add_scene_flags(enhance);
  std::string enh_alg = "autoN", enh_sync = "estimated", enh_estimator = "oracle";
  double enh_gamma = 0.5;
  bool enh_dump = false;
  enhance->add_option("--algorithm", enh_alg, "selection algorithm");
  enhance->add_option("--sync-mode", enh_sync, "none | ground_truth | estimated");
  enhance->add_option("--estimator", enh_estimator, "oracle | mlp:<dir>");
  enhance->add_option("--gamma", enh_gamma, "selection threshold in [0, 1]");
  enhance->add_flag("--dump", enh_dump, "also write the scene and beamformer diagnostics");

  auto* experiment = app.add_subcommand("experiment", "run the seeded scene sweep");
  ExperimentFlags exp_flags;
  exp_flags.add(experiment);

  auto* sweep = app.add_subcommand("gamma-sweep", "sweep the selection threshold");
  ExperimentFlags sweep_flags;
  sweep_flags.add(sweep);
  std::vector<double> gammas = dab::kDefaultGammas;
  sweep->add_option("--gammas", gammas, "threshold values");

  auto* mc = app.add_subcommand("montecarlo", "speaker-to-microphone distance study");
  dab::MonteCarloConfig mc_cfg;
  std::string mc_out = "montecarlo", mc_shape = "square";
  mc->add_option("--seed", mc_cfg.seed, "master seed");
  mc->add_option("--out-dir", mc_out, "output directory");
  mc->add_option("--jobs", mc_cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  mc->add_option("--trials", mc_cfg.trials, "random placements");
  mc->add_option("-M,--mics", mc_cfg.num_mics, "microphones");
  mc->add_option("--max-distance", mc_cfg.max_distance_m, "largest distance inside the floor (m)");
  mc->add_option("--shape", mc_shape, "square | rectangle | circle");

  auto* train = app.add_subcommand("train-toy", "train the toy mask and weight networks");
  dab::TrainToyConfig train_cfg;
  std::string train_out = "models";
  train->add_option("--seed", train_cfg.seed, "master seed");
  train->add_option("--out-dir", train_out, "checkpoint directory");
  train->add_option("--jobs", train_cfg.jobs, "worker threads")->check(CLI::PositiveNumber);
  train->add_option("--channels", train_cfg.num_channels, "training utterances");
  train->add_option("--hidden", train_cfg.hidden, "hidden layer sizes");
  train->add_option("--context", train_cfg.context, "mask-net context frames (odd)");
  train->add_option("--mask-epochs", train_cfg.mask_epochs, "mask-net epochs");
  train->add_option("--weight-epochs", train_cfg.weight_epochs, "weight-net epochs");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      const dab::Scene scene = dab::make_scene(make_spec(), scene_seed_flag);
      dab::export_scene(scene, scene_out);
      std::cout << "wrote " << scene.num_mics() << "-channel scene to " << scene_out << "\n";
    } else if (*enhance) {
      const dab::Estimators est = dab::make_estimators(enh_estimator);
      const dab::PreparedScene ps =
          dab::prepare_scene(dab::make_scene(make_spec(), scene_seed_flag), est);
      const dab::SyncedScene ss = dab::synchronize_scene(ps, dab::sync_mode_from_string(enh_sync), est);
      dab::SelectionParams params;
      params.gamma = enh_gamma;
      const dab::ArmResult arm = dab::evaluate_arm(ps, ss, dab::algorithm_from_string(enh_alg),
                                                   params, dab::derive_seed(scene_seed_flag, 1));
      fs::create_directories(scene_out);
      const dab::TimeSignal out = arm.enhanced.output;
      dab::write_wav((fs::path(scene_out) / "enhanced.wav").string(),
                     std::span<const dab::TimeSignal>(&out, 1));
      std::vector<int> truth;
      for (int n = 0; n < ps.scene.num_mics(); ++n)
        truth.push_back(ps.scene.true_relative_delay(n, ss.alignment.reference_index));
      nlohmann::json result{
          {"si_sdr_db", arm.eval.si_sdr_db},
          {"snr_variant", arm.eval.snr_variant},
          {"reference_channel", arm.enhanced.reference_channel},
          {"selection", dab::selection_json(enh_alg, {{"gamma", enh_gamma}}, ps.q, arm.selection)},
          {"delays", dab::delay_report(ss.alignment, &truth)}};
      for (const auto& w : ss.alignment.warnings) std::cerr << "warning: " << w << "\n";
      dab::write_text((fs::path(scene_out) / "result.json").string(), result.dump(2) + "\n");
      if (enh_dump) {
        dab::export_scene(ps.scene, (fs::path(scene_out) / "scene").string());
        if (arm.enhanced.solution)
          dab::write_text((fs::path(scene_out) / "beamformer.json").string(),
                          dab::beamformer_debug_json(*arm.enhanced.solution).dump(2) + "\n");
      }
      std::cout << "SI-SDR " << arm.eval.si_sdr_db << " dB with " << arm.selection.count()
                << " channel(s)\n";
    } else if (*experiment) {
      const dab::ExperimentConfig cfg = exp_flags.build();
      const dab::ExperimentResult r = dab::run_experiment(cfg);
      const fs::path out(exp_flags.out_dir);
      dab::write_text((out / "results.csv").string(), dab::experiment_csv(r));
      dab::write_text((out / "config.json").string(), dab::to_json(cfg).dump(2) + "\n");
      dab::write_text((out / "failures.json").string(), failures_json(r.failures).dump(2) + "\n");
      report_failures(r.failures, r.total_scenes);
      std::cout << r.rows.size() << " rows written to " << (out / "results.csv").string() << "\n";
      if (r.too_many_failures()) return 2;
    } else if (*sweep) {
      const dab::ExperimentConfig cfg = sweep_flags.build();
      const dab::GammaSweepResult r = dab::run_gamma_sweep(cfg, gammas);
      const fs::path out(sweep_flags.out_dir);
      dab::write_text((out / "gamma_sweep.csv").string(), dab::gamma_sweep_csv(r));
      report_failures(r.failures, cfg.n_scenes * static_cast<int>(cfg.snrato_db.size()));
      std::cout << r.rows.size() << " rows written to " << (out / "gamma_sweep.csv").string()
                << "\n";
    } else if (*mc) {
      mc_cfg.shape = floor_shape_from_string(mc_shape);
      const dab::MonteCarloResult r = dab::monte_carlo_distances(mc_cfg);
      const fs::path out(mc_out);
      dab::write_text((out / "trials.csv").string(), dab::montecarlo_csv(r));
      dab::write_text((out / "stats.csv").string(), dab::montecarlo_stats_csv(r));
      dab::write_text((out / "cdf.csv").string(), dab::montecarlo_cdf_csv(r));
      std::cout << dab::montecarlo_stats_csv(r);
    } else if (*train) {
      const dab::TrainToyResult r = dab::train_toy(train_cfg);
      dab::save_toy_models(r, train_out);
      std::cout << "mask loss " << r.mask.initial_loss << " -> " << r.mask.epoch_loss.back()
                << ", weight loss " << r.weight.initial_loss << " -> "
                << r.weight.epoch_loss.back() << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
