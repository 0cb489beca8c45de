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

#include "dab/pipeline.hpp"

#include <array>
#include <filesystem>
#include <utility>

namespace dab {

namespace {

constexpr std::array<std::pair<Algorithm, const char*>, 7> kAlgorithmNames{{
    {Algorithm::kOneBest, "1best"},
    {Algorithm::kAll, "all"},
    {Algorithm::kFixedN, "fixedN"},
    {Algorithm::kAutoN, "autoN"},
    {Algorithm::kSoftN, "softN"},
    {Algorithm::kLearningN, "learningN"},
    {Algorithm::kRandom, "random"},
}};

constexpr std::array<std::pair<SyncMode, const char*>, 3> kSyncNames{{
    {SyncMode::kNone, "none"},
    {SyncMode::kGroundTruth, "ground_truth"},
    {SyncMode::kEstimated, "estimated"},
}};

}  // namespace

std::string to_string(Algorithm a) {
  for (const auto& [k, name] : kAlgorithmNames)
    if (k == a) return name;
  throw Error("unknown algorithm");
}

std::string to_string(SyncMode s) {
  for (const auto& [k, name] : kSyncNames)
    if (k == s) return name;
  throw Error("unknown sync mode");
}

Algorithm algorithm_from_string(const std::string& s) {
  for (const auto& [k, name] : kAlgorithmNames)
    if (s == name) return k;
  throw Error("unknown algorithm '" + s + "'");
}

SyncMode sync_mode_from_string(const std::string& s) {
  for (const auto& [k, name] : kSyncNames)
    if (s == name) return k;
  throw Error("unknown sync mode '" + s + "'");
}

const std::vector<Algorithm>& selection_algorithms() {
  static const std::vector<Algorithm> all{Algorithm::kOneBest, Algorithm::kAll,
                                          Algorithm::kFixedN,  Algorithm::kAutoN,
                                          Algorithm::kSoftN,   Algorithm::kLearningN};
  return all;
}

Estimators make_estimators(const std::string& mode, const StftConfig& stft_cfg) {
  if (mode == "oracle")
    return {std::make_shared<OracleMaskEstimator>(stft_cfg),
            std::make_shared<OracleWeightEstimator>()};
  const std::string prefix = "mlp:";
  if (mode.rfind(prefix, 0) == 0) {
    const std::filesystem::path dir = mode.substr(prefix.size());
    return {std::make_shared<MlpMaskEstimator>(load_mlp((dir / "mask.json").string())),
            std::make_shared<MlpWeightEstimator>(load_mlp((dir / "weight.json").string()))};
  }
  throw Error("unknown estimator mode '" + mode + "'");
}

Scene make_scene(const SceneSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  SceneConfig cfg = spec.scene;
  const RoomSpec room = cfg.room ? *cfg.room : sample_test_room(rng);
  cfg.room = room;
  const int fs = kDefaultSampleRate;
  const TimeSignal speech = speech_like(spec.speech_s, fs, rng);
  const NoiseType type = spec.noise_type
                             ? *spec.noise_type
                             : static_cast<NoiseType>(std::uniform_int_distribution<int>(0, 3)(rng));
  const std::size_t bank_len =
      cfg.noise_kind == NoiseKind::kDiffuse
          ? static_cast<std::size_t>(cfg.num_mics) *
                scene_length(speech.size(), room, cfg.max_device_delay_s, fs)
          : speech.size();
  const TimeSignal bank = noise_bank(type, bank_len, fs, rng);
  Scene scene = synthesize_scene(speech, bank, cfg, rng);
  scene.seed = seed;
  return scene;
}

ChannelTruth observed_truth(const Scene& scene, int n) {
  const auto& ch = scene.channels.at(n);
  const int d = ch.device_delay_samples;
  return {delay_signal(ch.direct, d), delay_signal(ch.tail, d), delay_signal(ch.noise, d)};
}

PreparedScene prepare_scene(Scene scene, const Estimators& est, const StftConfig& stft_cfg) {
  PreparedScene ps;
  const int m = scene.num_mics();
  ps.q.resize(m);
  for (int n = 0; n < m; ++n) {
    const ChannelTruth truth = observed_truth(scene, n);
    const ComplexSpectrogram noisy = stft(scene.channels[n].observed, stft_cfg);
    const TFMask mask = est.masks->estimate(noisy, &truth);
    ps.q[n] = est.weights->estimate(pool_features(noisy.magnitude(), mask), &truth).q;
  }
  ps.reference = argmax_channel(ps.q);
  ps.scene = std::move(scene);
  return ps;
}

SyncedScene synchronize_scene(const PreparedScene& ps, SyncMode mode, const Estimators& est,
                              const StftConfig& stft_cfg) {
  const Scene& scene = ps.scene;
  const int m = scene.num_mics();
  SyncedScene ss;
  ss.mode = mode;
  std::vector<TimeSignal> observed;
  for (const auto& ch : scene.channels) observed.push_back(ch.observed);

  if (mode == SyncMode::kEstimated) {
    SyncResult r = synchronize(observed, ps.q, default_max_lag(scene.sample_rate));
    ss.alignment = std::move(r.alignment);
    ss.aligned = std::move(r.aligned);
  } else {
    std::vector<int> shifts(m, 0);
    if (mode == SyncMode::kGroundTruth)
      for (int n = 0; n < m; ++n) shifts[n] = scene.device_relative_delay(n, ps.reference);
    ss.alignment = alignment_from_shifts(std::move(shifts), scene.length(), ps.reference);
    for (int n = 0; n < m; ++n) ss.aligned.push_back(ss.alignment.apply(observed[n], n));
  }

  for (int n = 0; n < m; ++n) {
    const ChannelTruth t = observed_truth(scene, n);
    ss.truth.push_back({ss.alignment.apply(t.direct, n), ss.alignment.apply(t.tail, n),
                        ss.alignment.apply(t.noise, n)});
    ss.spectrograms.push_back(stft(ss.aligned[n], stft_cfg));
    ss.masks.push_back(est.masks->estimate(ss.spectrograms.back(), &ss.truth.back()));
  }
  return ss;
}

SelectionVector select_channels(Algorithm alg, std::span<const double> q, const SyncedScene& ss,
                                const SelectionParams& params, std::uint64_t random_seed,
                                std::optional<LearningSelection>* learning) {
  const int m = static_cast<int>(q.size());
  switch (alg) {
    case Algorithm::kOneBest:
      return select_1best(q);
    case Algorithm::kAll:
      return select_all(m);
    case Algorithm::kFixedN:
      return select_fixed_n(q, params.fixed_n > 0 ? params.fixed_n : default_fixed_n(m));
    case Algorithm::kAutoN:
      return select_auto_n(q, params.gamma);
    case Algorithm::kSoftN:
      return select_soft_n(q, params.gamma);
    case Algorithm::kLearningN: {
      LearningSelection ls =
          select_learning_n(ss.spectrograms, q, params.gamma, params.sigma, params.dims);
      SelectionVector p = ls.selection;
      if (learning) *learning = std::move(ls);
      return p;
    }
    case Algorithm::kRandom: {
      Rng rng(random_seed);
      SelectionVector p{std::vector<double>(m, 0.0)};
      p.p[std::uniform_int_distribution<int>(0, m - 1)(rng)] = 1.0;
      return p;
    }
  }
  throw Error("unknown algorithm");
}

ArmResult evaluate_arm(const PreparedScene& ps, const SyncedScene& ss, Algorithm alg,
                       const SelectionParams& params, std::uint64_t random_seed,
                       const StftConfig& stft_cfg) {
  ArmResult r;
  r.algorithm = alg;
  r.sync_mode = ss.mode;
  r.selection = select_channels(alg, ps.q, ss, params, random_seed, &r.learning);
  r.enhanced = enhance(ss.aligned, ss.masks, r.selection, ps.q, stft_cfg);
  r.eval = evaluate(ss.truth[r.enhanced.reference_channel].direct, r.enhanced.output);
  r.eval.seed = ps.scene.seed;
  r.eval.algorithm = to_string(alg);
  r.eval.snrato_db = ps.scene.snrato_db;
  return r;
}

}  // namespace dab
