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

// Time-frequency masks and per-channel quality weights, either computed from
// scene ground truth (oracle) or predicted by small feedforward networks.

#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dab/mlp.hpp"
#include "dab/random.hpp"
#include "dab/spectral.hpp"

namespace dab {

// T x F real mask with every entry in [0, 1].
class TFMask {
 public:
  TFMask() = default;
  explicit TFMask(RMatrix values);

  const RMatrix& values() const { return values_; }
  int num_frames() const { return static_cast<int>(values_.rows()); }
  int num_bins() const { return static_cast<int>(values_.cols()); }
  double operator()(int t, int f) const { return values_(t, f); }

 private:
  RMatrix values_;
};

// Denominator floor for silent bins; a bin with no energy at all gets 0.
inline constexpr double kMaskFloor = 1e-12;

// |x| / (|x| + |h + n|) per bin.
TFMask ideal_ratio_mask(const ComplexSpectrogram& direct,
                        const ComplexSpectrogram& tail,
                        const ComplexSpectrogram& noise);

struct ChannelWeight {
  double q = 0.0;
};

// sum|x| / (sum|x| + sum|n|) over time-domain samples.
ChannelWeight true_channel_weight(const TimeSignal& direct, const TimeSignal& noise);

struct PooledFeature {
  Eigen::VectorXd noisy_pool;  // mean amplitude per bin
  Eigen::VectorXd mask_pool;   // mean mask per bin

  Eigen::VectorXd stacked() const;  // [noisy_pool; mask_pool]
};

PooledFeature pool_features(const RMatrix& noisy_mag, const TFMask& mask);

// Clean components of one channel, time-aligned with its observed signal.
struct ChannelTruth {
  TimeSignal direct;
  TimeSignal tail;
  TimeSignal noise;
};

class MaskEstimator {
 public:
  virtual ~MaskEstimator() = default;
  // `truth` may be null for estimators that do not need it.
  virtual TFMask estimate(const ComplexSpectrogram& noisy,
                          const ChannelTruth* truth) const = 0;
};

class OracleMaskEstimator final : public MaskEstimator {
 public:
  explicit OracleMaskEstimator(StftConfig cfg = {}) : cfg_(cfg) {}
  TFMask estimate(const ComplexSpectrogram& noisy,
                  const ChannelTruth* truth) const override;

 private:
  StftConfig cfg_;
};

// Input features for the mask network: per-utterance standardized
// log-magnitudes, each frame stacked with (context - 1) / 2 neighbours on
// either side (edges replicate). Returns (context * F) x T.
Eigen::MatrixXd mask_features(const ComplexSpectrogram& noisy, int context);

class MlpMaskEstimator final : public MaskEstimator {
 public:
  explicit MlpMaskEstimator(MlpModel model);
  TFMask estimate(const ComplexSpectrogram& noisy,
                  const ChannelTruth* truth) const override;
  const MlpModel& model() const { return model_; }

 private:
  MlpModel model_;
};

class WeightEstimator {
 public:
  virtual ~WeightEstimator() = default;
  virtual ChannelWeight estimate(const PooledFeature& feat,
                                 const ChannelTruth* truth) const = 0;
};

class OracleWeightEstimator final : public WeightEstimator {
 public:
  ChannelWeight estimate(const PooledFeature& feat,
                         const ChannelTruth* truth) const override;
};

class MlpWeightEstimator final : public WeightEstimator {
 public:
  explicit MlpWeightEstimator(MlpModel model);
  ChannelWeight estimate(const PooledFeature& feat,
                         const ChannelTruth* truth) const override;

 private:
  MlpModel model_;
};

// ---------------------------------------------------------------------------
// Toy-scale training data: single-microphone reverberant rooms with a point
// noise source at a random source-level SNR.

struct ToyChannel {
  TimeSignal observed;
  ChannelTruth truth;
};

struct ToyDataConfig {
  double duration_s = 1.0;
  double snr_min_db = -10.0;
  double snr_max_db = 20.0;
  int fs = kDefaultSampleRate;
};

ToyChannel make_toy_channel(const ToyDataConfig& cfg, Rng& rng);

// One column per frame; target is the oracle IRM.
Dataset make_mask_dataset(std::span<const ToyChannel> channels, int context,
                          const StftConfig& stft_cfg = {});

// One column per channel; input is [noisy_pool; mask_pool] with the mask
// produced by `masks`, target is the true channel weight.
Dataset make_weight_dataset(std::span<const ToyChannel> channels,
                            const MaskEstimator& masks,
                            const StftConfig& stft_cfg = {});

}  // namespace dab
