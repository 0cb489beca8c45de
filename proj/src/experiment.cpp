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

#include "dab/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "dab/random.hpp"
#include "dab/wav.hpp"

namespace dab {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kRandomArmSalt = 0x72616e646f6dULL;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path.string(), j.dump(2) + "\n");
}

SceneSpec scene_spec(const ExperimentConfig& cfg, double snr) {
  SceneSpec spec;
  spec.scene.num_mics = cfg.num_mics;
  spec.scene.array_kind = cfg.array_kind;
  spec.scene.noise_kind = cfg.noise_kind;
  spec.scene.snrato_db = snr;
  spec.scene.max_device_delay_s = cfg.max_device_delay_s;
  spec.speech_s = cfg.speech_s;
  spec.noise_type = cfg.noise_type;
  return spec;
}

void dump_arm(const fs::path& dir, const PreparedScene& ps, const ArmResult& arm) {
  const std::string tag = to_string(arm.sync_mode) + "_" + to_string(arm.algorithm);
  nlohmann::json params{{"sync_mode", to_string(arm.sync_mode)}};
  std::vector<int> clusters;
  if (arm.learning) clusters = arm.learning->clusters.assignment;
  write_json(dir / ("selection_" + tag + ".json"),
             selection_json(to_string(arm.algorithm), params, ps.q, arm.selection,
                            arm.learning ? &clusters : nullptr));
  if (arm.enhanced.solution)
    write_json(dir / ("beamformer_" + tag + ".json"),
               beamformer_debug_json(*arm.enhanced.solution));
  const TimeSignal out = arm.enhanced.output;
  write_wav((dir / ("enhanced_" + tag + ".wav")).string(), std::span<const TimeSignal>(&out, 1),
            WavFormat::kFloat32);
}

void dump_sync(const fs::path& dir, const PreparedScene& ps, const SyncedScene& ss) {
  std::vector<int> truth;
  for (int n = 0; n < ps.scene.num_mics(); ++n)
    truth.push_back(ps.scene.true_relative_delay(n, ss.alignment.reference_index));
  write_json(dir / ("delays_" + to_string(ss.mode) + ".json"), delay_report(ss.alignment, &truth));
}

std::vector<double> json_number_list(const nlohmann::json& v) {
  if (v.is_number()) return {v.get<double>()};
  return v.get<std::vector<double>>();
}

std::vector<std::string> json_string_list(const nlohmann::json& v) {
  if (v.is_string()) return {v.get<std::string>()};
  return v.get<std::vector<std::string>>();
}

struct SceneTask {
  std::size_t snr_index;
  int scene;
};

std::vector<SceneTask> scene_tasks(const ExperimentConfig& cfg) {
  std::vector<SceneTask> tasks;
  for (std::size_t s = 0; s < cfg.snrato_db.size(); ++s)
    for (int i = 0; i < cfg.n_scenes; ++i) tasks.push_back({s, i});
  return tasks;
}

}  // namespace

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path);
  os << text;
  if (!os) throw Error("write failed: " + path);
}

void ExperimentConfig::validate() const {
  if (n_scenes < 1) throw Error("n_scenes must be at least 1");
  if (num_mics < 1) throw Error("M must be at least 1");
  if (snrato_db.empty()) throw Error("at least one SNRatO value is required");
  if (algorithms.empty()) throw Error("at least one algorithm is required");
  if (sync_modes.empty()) throw Error("at least one sync mode is required");
  if (!(params.gamma >= 0.0 && params.gamma <= 1.0)) throw Error("gamma must lie in [0, 1]");
  if (!(params.sigma > 0.0)) throw Error("sigma must be positive");
  if (params.fixed_n < 0 || params.fixed_n > num_mics) throw Error("N must lie in [1, M]");
  if (params.dims < 0 || params.dims > num_mics) throw Error("J must lie in [1, M]");
  if (!(speech_s > 0.0)) throw Error("speech duration must be positive");
  if (max_device_delay_s < 0.0) throw Error("device delay range must be nonnegative");
  if (jobs < 1) throw Error("jobs must be at least 1");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known{
      "master_seed", "n_scenes", "M", "noise_kind", "array_kind", "snrato_db",
      "algorithms", "sync_modes", "gamma", "N", "J", "sigma", "estimator", "speech_s",
      "max_device_delay_s", "noise_type", "jobs", "dump_dir"};
  if (!j.is_object()) throw Error("experiment config must be a JSON object");
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw Error("unknown config key '" + key + "'");
  ExperimentConfig cfg;
  try {
    if (j.contains("master_seed")) cfg.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("n_scenes")) cfg.n_scenes = j["n_scenes"].get<int>();
    if (j.contains("M")) cfg.num_mics = j["M"].get<int>();
    if (j.contains("noise_kind")) cfg.noise_kind = noise_kind_from_string(j["noise_kind"]);
    if (j.contains("array_kind")) cfg.array_kind = array_kind_from_string(j["array_kind"]);
    if (j.contains("snrato_db")) cfg.snrato_db = json_number_list(j["snrato_db"]);
    if (j.contains("algorithms")) {
      cfg.algorithms.clear();
      for (const auto& a : json_string_list(j["algorithms"]))
        cfg.algorithms.push_back(algorithm_from_string(a));
    }
    if (j.contains("sync_modes")) {
      cfg.sync_modes.clear();
      for (const auto& s : json_string_list(j["sync_modes"]))
        cfg.sync_modes.push_back(sync_mode_from_string(s));
    }
    if (j.contains("gamma")) cfg.params.gamma = j["gamma"].get<double>();
    if (j.contains("N")) cfg.params.fixed_n = j["N"].get<int>();
    if (j.contains("J")) cfg.params.dims = j["J"].get<int>();
    if (j.contains("sigma")) cfg.params.sigma = j["sigma"].get<double>();
    if (j.contains("estimator")) cfg.estimator = j["estimator"].get<std::string>();
    if (j.contains("speech_s")) cfg.speech_s = j["speech_s"].get<double>();
    if (j.contains("max_device_delay_s"))
      cfg.max_device_delay_s = j["max_device_delay_s"].get<double>();
    if (j.contains("noise_type") && !j["noise_type"].is_null())
      cfg.noise_type = noise_type_from_string(j["noise_type"]);
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("dump_dir")) cfg.dump_dir = j["dump_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad experiment config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["master_seed"] = cfg.master_seed;
  j["n_scenes"] = cfg.n_scenes;
  j["M"] = cfg.num_mics;
  j["noise_kind"] = to_string(cfg.noise_kind);
  j["array_kind"] = to_string(cfg.array_kind);
  j["snrato_db"] = cfg.snrato_db;
  std::vector<std::string> algs, modes;
  for (auto a : cfg.algorithms) algs.push_back(to_string(a));
  for (auto s : cfg.sync_modes) modes.push_back(to_string(s));
  j["algorithms"] = algs;
  j["sync_modes"] = modes;
  j["gamma"] = cfg.params.gamma;
  j["N"] = cfg.params.fixed_n > 0 ? cfg.params.fixed_n : default_fixed_n(cfg.num_mics);
  j["J"] = cfg.params.dims > 0 ? cfg.params.dims : std::max(1, cfg.num_mics / 2);
  j["sigma"] = cfg.params.sigma;
  j["estimator"] = cfg.estimator;
  j["speech_s"] = cfg.speech_s;
  j["max_device_delay_s"] = cfg.max_device_delay_s;
  j["noise_type"] = cfg.noise_type ? nlohmann::json(to_string(*cfg.noise_type)) : nlohmann::json(nullptr);
  j["jobs"] = cfg.jobs;
  j["dump_dir"] = cfg.dump_dir;
  return j;
}

std::uint64_t scene_seed(std::uint64_t master, std::size_t snr_index, std::size_t scene) {
  return derive_seed(derive_seed(master, snr_index), scene);
}

bool ExperimentResult::too_many_failures() const {
  return static_cast<double>(failures.size()) > 0.1 * total_scenes;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Estimators est = make_estimators(cfg.estimator);
  const std::vector<SceneTask> tasks = scene_tasks(cfg);

  struct Outcome {
    std::vector<ExperimentRow> rows;
    std::optional<SceneFailure> failure;
  };
  std::vector<Outcome> outcomes(tasks.size());

  parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
    const auto [s, i] = tasks[t];
    const double snr = cfg.snrato_db[s];
    const std::uint64_t seed = scene_seed(cfg.master_seed, s, i);
    Outcome& out = outcomes[t];
    try {
      const PreparedScene ps = prepare_scene(make_scene(scene_spec(cfg, snr), seed), est);
      fs::path dir;
      if (!cfg.dump_dir.empty()) {
        dir = fs::path(cfg.dump_dir) / ("scene_" + std::to_string(s) + "_" + std::to_string(i));
        export_scene(ps.scene, dir.string());
      }
      for (SyncMode mode : cfg.sync_modes) {
        const SyncedScene ss = synchronize_scene(ps, mode, est);
        if (!dir.empty()) dump_sync(dir, ps, ss);
        for (Algorithm alg : cfg.algorithms) {
          const ArmResult arm =
              evaluate_arm(ps, ss, alg, cfg.params, derive_seed(seed, kRandomArmSalt));
          if (!dir.empty()) dump_arm(dir, ps, arm);
          out.rows.push_back({i, seed, snr, cfg.noise_kind, cfg.num_mics, alg, mode,
                              arm.eval.si_sdr_db, arm.eval.snr_variant, arm.selection.count()});
        }
      }
    } catch (const std::exception& e) {
      out.rows.clear();
      out.failure = SceneFailure{i, seed, snr, e.what()};
    }
  });

  ExperimentResult r;
  r.total_scenes = static_cast<int>(tasks.size());
  for (auto& o : outcomes) {
    for (auto& row : o.rows) r.rows.push_back(row);
    if (o.failure) r.failures.push_back(*o.failure);
  }
  return r;
}

std::string experiment_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "scene,seed,snrato_db,noise_kind,M,algorithm,sync_mode,si_sdr_db,snr_variant,n_selected\n";
  for (const auto& row : r.rows) {
    os << row.scene << ',' << row.seed << ',' << fmt(row.snrato_db) << ','
       << to_string(row.noise_kind) << ',' << row.num_mics << ',' << to_string(row.algorithm)
       << ',' << to_string(row.sync_mode) << ',' << fmt(row.si_sdr_db) << ','
       << fmt(row.snr_variant) << ',' << row.n_selected << '\n';
  }
  return os.str();
}

GammaSweepResult run_gamma_sweep(const ExperimentConfig& cfg, const std::vector<double>& gammas,
                                 std::vector<Algorithm> algorithms) {
  cfg.validate();
  if (gammas.empty()) throw Error("gamma sweep: no gamma values");
  for (double g : gammas)
    if (!(g >= 0.0)) throw Error("gamma sweep: gamma must be nonnegative");
  const Estimators est = make_estimators(cfg.estimator);
  const std::vector<SceneTask> tasks = scene_tasks(cfg);
  const SyncMode mode = cfg.sync_modes.front();

  struct Outcome {
    std::vector<GammaSweepScene> scenes;
    std::optional<SceneFailure> failure;
  };
  std::vector<Outcome> outcomes(tasks.size());
  parallel_for(tasks.size(), cfg.jobs, [&](std::size_t t) {
    const auto [s, i] = tasks[t];
    const double snr = cfg.snrato_db[s];
    const std::uint64_t seed = scene_seed(cfg.master_seed, s, i);
    try {
      const PreparedScene ps = prepare_scene(make_scene(scene_spec(cfg, snr), seed), est);
      const SyncedScene ss = synchronize_scene(ps, mode, est);
      for (double g : gammas) {
        SelectionParams params = cfg.params;
        params.gamma = g;
        for (Algorithm alg : algorithms) {
          const ArmResult arm =
              evaluate_arm(ps, ss, alg, params, derive_seed(seed, kRandomArmSalt));
          outcomes[t].scenes.push_back(
              {static_cast<int>(t), g, alg, arm.selection.support(), arm.eval.si_sdr_db});
        }
      }
    } catch (const std::exception& e) {
      outcomes[t].scenes.clear();
      outcomes[t].failure = SceneFailure{i, seed, snr, e.what()};
    }
  });

  GammaSweepResult r;
  for (auto& o : outcomes) {
    for (auto& sc : o.scenes) r.scenes.push_back(std::move(sc));
    if (o.failure) r.failures.push_back(*o.failure);
  }
  for (double g : gammas) {
    for (Algorithm alg : algorithms) {
      double sdr = 0.0, count = 0.0;
      int n = 0;
      for (const auto& sc : r.scenes) {
        if (sc.gamma != g || sc.algorithm != alg) continue;
        sdr += sc.si_sdr_db;
        for (bool b : sc.support) count += b ? 1.0 : 0.0;
        ++n;
      }
      if (n == 0) throw Error("gamma sweep: every scene failed");
      r.rows.push_back({g, alg, sdr / n, count / n});
    }
  }
  return r;
}

std::string gamma_sweep_csv(const GammaSweepResult& r) {
  std::ostringstream os;
  os << "gamma,algorithm,mean_si_sdr,mean_n_selected\n";
  for (const auto& row : r.rows)
    os << fmt(row.gamma) << ',' << to_string(row.algorithm) << ',' << fmt(row.mean_si_sdr) << ','
       << fmt(row.mean_n_selected) << '\n';
  return os.str();
}

std::string montecarlo_stats_csv(const MonteCarloResult& r) {
  std::ostringstream os;
  os << "block,mean_m,std_m,p_above_5m\n";
  const std::pair<const char*, const DistanceStats*> blocks[] = {
      {"conventional", &r.conventional}, {"adhoc_avg", &r.adhoc_avg}, {"adhoc_best", &r.adhoc_best}};
  for (const auto& [name, st] : blocks)
    os << name << ',' << fmt(st->mean_m) << ',' << fmt(st->std_m) << ','
       << fmt(st->fraction_above(5.0)) << '\n';
  return os.str();
}

std::string montecarlo_cdf_csv(const MonteCarloResult& r) {
  std::ostringstream os;
  os << "block,distance_m,cdf\n";
  const std::pair<const char*, const DistanceStats*> blocks[] = {
      {"conventional", &r.conventional}, {"adhoc_avg", &r.adhoc_avg}, {"adhoc_best", &r.adhoc_best}};
  for (const auto& [name, st] : blocks)
    for (const auto& [d, p] : st->cdf) os << name << ',' << fmt(d) << ',' << fmt(p) << '\n';
  return os.str();
}

TrainToyResult train_toy(const TrainToyConfig& cfg) {
  if (cfg.num_channels < 1) throw Error("train-toy: need at least one channel");
  // Disjoint utterance pools for the two networks.
  auto make_pool = [&](std::uint64_t pool) {
    std::vector<ToyChannel> channels(cfg.num_channels);
    parallel_for(channels.size(), cfg.jobs, [&](std::size_t i) {
      Rng rng(derive_seed(derive_seed(cfg.seed, pool), i));
      channels[i] = make_toy_channel(cfg.data, rng);
    });
    return channels;
  };
  const std::vector<ToyChannel> mask_pool = make_pool(0);
  const std::vector<ToyChannel> weight_pool = make_pool(1);
  const StftConfig stft_cfg;
  const int bins = stft_cfg.num_bins();
  Rng init(derive_seed(cfg.seed, 0x696e6974ULL));

  TrainToyResult r;
  const Dataset mask_data = make_mask_dataset(mask_pool, cfg.context, stft_cfg);
  std::vector<int> sizes{cfg.context * bins};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(bins);
  r.mask_model = MlpModel::random(sizes, cfg.context, init);
  TrainHyper hyper;
  hyper.epochs = cfg.mask_epochs;
  hyper.batch_size = cfg.mask_batch;
  hyper.shuffle_seed = derive_seed(cfg.seed, 1);
  r.mask = mlp_train(r.mask_model, mask_data, hyper);

  const MlpMaskEstimator masks(r.mask_model);
  const Dataset weight_data = make_weight_dataset(weight_pool, masks, stft_cfg);
  sizes = {2 * bins};
  sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  sizes.push_back(1);
  r.weight_model = MlpModel::random(sizes, 1, init);
  hyper.epochs = cfg.weight_epochs;
  hyper.batch_size = cfg.weight_batch;
  hyper.shuffle_seed = derive_seed(cfg.seed, 2);
  r.weight = mlp_train(r.weight_model, weight_data, hyper);
  return r;
}

void save_toy_models(const TrainToyResult& r, const std::string& dir) {
  fs::create_directories(dir);
  save_mlp(r.mask_model, (fs::path(dir) / "mask.json").string());
  save_mlp(r.weight_model, (fs::path(dir) / "weight.json").string());
}

}  // namespace dab
