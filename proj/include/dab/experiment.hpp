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

// Batch experiments: seeded scene sweeps over selection algorithms and
// synchronization arms, the gamma sweep, the distance study and toy-scale
// estimator training.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dab/acoustics.hpp"
#include "dab/mlp.hpp"
#include "dab/pipeline.hpp"

namespace dab {

struct ExperimentConfig {
  std::uint64_t master_seed = 1;
  int n_scenes = 10;
  int num_mics = 16;
  NoiseKind noise_kind = NoiseKind::kDiffuse;
  ArrayKind array_kind = ArrayKind::kAdhoc;
  std::vector<double> snrato_db{10.0};
  std::vector<Algorithm> algorithms = selection_algorithms();
  std::vector<SyncMode> sync_modes{SyncMode::kEstimated};
  SelectionParams params;
  std::string estimator = "oracle";
  double speech_s = 3.0;
  double max_device_delay_s = 0.5;
  std::optional<NoiseType> noise_type;
  int jobs = 1;
  std::string dump_dir;  // per-scene artifacts when non-empty

  void validate() const;
};

// Unknown keys are rejected; missing keys keep their defaults.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& cfg);

// Seed of scene i at SNR index s.
std::uint64_t scene_seed(std::uint64_t master, std::size_t snr_index, std::size_t scene);

struct ExperimentRow {
  int scene = 0;
  std::uint64_t seed = 0;
  double snrato_db = 0.0;
  NoiseKind noise_kind = NoiseKind::kDiffuse;
  int num_mics = 0;
  Algorithm algorithm = Algorithm::kAll;
  SyncMode sync_mode = SyncMode::kNone;
  double si_sdr_db = 0.0;
  double snr_variant = 0.0;
  int n_selected = 0;
};

struct SceneFailure {
  int scene = 0;
  std::uint64_t seed = 0;
  double snrato_db = 0.0;
  std::string message;
};

struct ExperimentResult {
  std::vector<ExperimentRow> rows;
  std::vector<SceneFailure> failures;
  int total_scenes = 0;

  // More than 10% of scenes failed.
  bool too_many_failures() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

std::string experiment_csv(const ExperimentResult& r);

struct GammaSweepRow {
  double gamma = 0.0;
  Algorithm algorithm = Algorithm::kAutoN;
  double mean_si_sdr = 0.0;
  double mean_n_selected = 0.0;
};

struct GammaSweepScene {
  int scene = 0;
  double gamma = 0.0;
  Algorithm algorithm = Algorithm::kAutoN;
  std::vector<bool> support;
  double si_sdr_db = 0.0;
};

struct GammaSweepResult {
  std::vector<GammaSweepRow> rows;
  std::vector<GammaSweepScene> scenes;
  std::vector<SceneFailure> failures;
};

inline const std::vector<double> kDefaultGammas{0.1, 0.3, 0.5, 0.7, 0.9};

// autoN, softN and learningN on the scenes of `cfg` (first sync mode), one
// aggregate row per (gamma, algorithm).
GammaSweepResult run_gamma_sweep(const ExperimentConfig& cfg,
                                 const std::vector<double>& gammas = kDefaultGammas,
                                 std::vector<Algorithm> algorithms = {Algorithm::kAutoN,
                                                                      Algorithm::kSoftN,
                                                                      Algorithm::kLearningN});

std::string gamma_sweep_csv(const GammaSweepResult& r);

// block,mean_m,std_m,p_above_5m for the three distance distributions.
std::string montecarlo_stats_csv(const MonteCarloResult& r);
// block,distance_m,cdf
std::string montecarlo_cdf_csv(const MonteCarloResult& r);

struct TrainToyConfig {
  std::uint64_t seed = 1;
  int num_channels = 60;  // per network
  ToyDataConfig data;
  std::vector<int> hidden{64, 64};
  int context = 7;
  int mask_epochs = 10;
  int weight_epochs = 30;
  int mask_batch = 512;
  int weight_batch = 32;
  int jobs = 1;
};

struct TrainToyResult {
  TrainReport mask;
  TrainReport weight;
  MlpModel mask_model;
  MlpModel weight_model;
};

// Trains the mask network, then the weight network on its masks.
TrainToyResult train_toy(const TrainToyConfig& cfg);

// Writes mask.json and weight.json into `dir`.
void save_toy_models(const TrainToyResult& r, const std::string& dir);

void write_text(const std::string& path, const std::string& text);

}  // namespace dab
