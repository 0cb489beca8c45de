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

// Scene-level pipeline: scene generation, channel weights, synchronization
// arms, channel selection and enhancement, evaluated against the reference
// direct sound.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dab/acoustics.hpp"
#include "dab/beamformer.hpp"
#include "dab/estimation.hpp"
#include "dab/metrics.hpp"
#include "dab/selection.hpp"
#include "dab/sources.hpp"
#include "dab/sync.hpp"

namespace dab {

// kRandom is a single uniformly drawn channel, used as a baseline.
enum class Algorithm { kOneBest, kAll, kFixedN, kAutoN, kSoftN, kLearningN, kRandom };
enum class SyncMode { kNone, kGroundTruth, kEstimated };

std::string to_string(Algorithm a);
std::string to_string(SyncMode s);
Algorithm algorithm_from_string(const std::string& s);
SyncMode sync_mode_from_string(const std::string& s);
const std::vector<Algorithm>& selection_algorithms();  // the six selection rules

struct SelectionParams {
  double gamma = 0.5;
  int fixed_n = 0;  // 0: round(sqrt(M))
  int dims = 0;     // 0: M / 2
  double sigma = 1.0;
};

struct Estimators {
  std::shared_ptr<const MaskEstimator> masks;
  std::shared_ptr<const WeightEstimator> weights;
};

// "oracle" or "mlp:<dir>" with <dir>/mask.json and <dir>/weight.json.
Estimators make_estimators(const std::string& mode, const StftConfig& stft_cfg = {});

struct SceneSpec {
  SceneConfig scene;
  double speech_s = 3.0;
  std::optional<NoiseType> noise_type;  // drawn per scene if unset
};

// Everything random in the scene derives from `seed`.
Scene make_scene(const SceneSpec& spec, std::uint64_t seed);

// Components of channel n as they appear in its observed (device-delayed) signal.
ChannelTruth observed_truth(const Scene& scene, int n);

struct PreparedScene {
  Scene scene;
  std::vector<double> q;  // channel weights from the unaligned observations
  int reference = 0;      // argmax q
};

PreparedScene prepare_scene(Scene scene, const Estimators& est, const StftConfig& stft_cfg = {});

struct SyncedScene {
  SyncMode mode = SyncMode::kNone;
  Alignment alignment;
  std::vector<TimeSignal> aligned;
  std::vector<ChannelTruth> truth;  // aligned identically
  std::vector<ComplexSpectrogram> spectrograms;
  std::vector<TFMask> masks;
};

SyncedScene synchronize_scene(const PreparedScene& ps, SyncMode mode, const Estimators& est,
                              const StftConfig& stft_cfg = {});

struct ArmResult {
  Algorithm algorithm = Algorithm::kAll;
  SyncMode sync_mode = SyncMode::kNone;
  SelectionVector selection;
  std::optional<LearningSelection> learning;
  EnhanceResult enhanced;
  EvalResult eval;
};

// `random_seed` drives the kRandom baseline only.
SelectionVector select_channels(Algorithm alg, std::span<const double> q, const SyncedScene& ss,
                                const SelectionParams& params, std::uint64_t random_seed,
                                std::optional<LearningSelection>* learning = nullptr);

// Output is scored against the aligned direct sound of its reference channel.
ArmResult evaluate_arm(const PreparedScene& ps, const SyncedScene& ss, Algorithm alg,
                       const SelectionParams& params, std::uint64_t random_seed,
                       const StftConfig& stft_cfg = {});

}  // namespace dab
