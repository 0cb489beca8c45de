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

#include "dab/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "dab/acoustics.hpp"
#include "dab/sources.hpp"

namespace dab {

TFMask::TFMask(RMatrix values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const double v = values_.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) throw Error("mask entry outside [0, 1]");
  }
}

TFMask ideal_ratio_mask(const ComplexSpectrogram& direct,
                        const ComplexSpectrogram& tail,
                        const ComplexSpectrogram& noise) {
  const int t = direct.num_frames(), f = direct.num_bins();
  if (tail.num_frames() != t || tail.num_bins() != f || noise.num_frames() != t ||
      noise.num_bins() != f)
    throw Error("ideal_ratio_mask: spectrogram shapes differ");
  RMatrix m(t, f);
  for (int i = 0; i < t; ++i) {
    for (int k = 0; k < f; ++k) {
      const double x = std::abs(direct(i, k));
      const double r = std::abs(tail(i, k) + noise(i, k));
      m(i, k) = x / std::max(x + r, kMaskFloor);
    }
  }
  return TFMask(std::move(m));
}

ChannelWeight true_channel_weight(const TimeSignal& direct, const TimeSignal& noise) {
  if (direct.size() != noise.size()) throw Error("true_channel_weight: length mismatch");
  double sx = 0.0, sn = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    sx += std::abs(direct[i]);
    sn += std::abs(noise[i]);
  }
  if (sx + sn == 0.0) throw Error("true_channel_weight: speech and noise are both silent");
  return {sx / (sx + sn)};
}

Eigen::VectorXd PooledFeature::stacked() const {
  Eigen::VectorXd v(noisy_pool.size() + mask_pool.size());
  v << noisy_pool, mask_pool;
  return v;
}

PooledFeature pool_features(const RMatrix& noisy_mag, const TFMask& mask) {
  if (noisy_mag.rows() != mask.num_frames() || noisy_mag.cols() != mask.num_bins())
    throw Error("pool_features: shape mismatch");
  if (noisy_mag.rows() == 0) throw Error("pool_features: no frames");
  PooledFeature p;
  p.noisy_pool = noisy_mag.colwise().mean().transpose();
  p.mask_pool = mask.values().colwise().mean().transpose();
  return p;
}

TFMask OracleMaskEstimator::estimate(const ComplexSpectrogram& noisy,
                                     const ChannelTruth* truth) const {
  if (!truth) throw Error("oracle mask estimator needs ground truth");
  TFMask m = ideal_ratio_mask(stft(truth->direct, cfg_), stft(truth->tail, cfg_),
                              stft(truth->noise, cfg_));
  if (m.num_frames() != noisy.num_frames() || m.num_bins() != noisy.num_bins())
    throw Error("oracle mask: ground truth does not match the observed signal");
  return m;
}

Eigen::MatrixXd mask_features(const ComplexSpectrogram& noisy, int context) {
  if (context < 1 || context % 2 == 0) throw Error("context window must be odd");
  const int t_len = noisy.num_frames(), f_len = noisy.num_bins();
  RMatrix logmag = noisy.magnitude().unaryExpr([](double v) { return std::log(v + 1e-8); });
  const double mean = logmag.mean();
  const double var = (logmag.array() - mean).square().mean();
  const double inv_std = var > 0 ? 1.0 / std::sqrt(var) : 1.0;
  logmag = ((logmag.array() - mean) * inv_std).matrix();

  const int half = context / 2;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(context) * f_len, t_len);
  for (int t = 0; t < t_len; ++t) {
    for (int c = -half; c <= half; ++c) {
      const int src = std::clamp(t + c, 0, t_len - 1);
      out.block(static_cast<Eigen::Index>(c + half) * f_len, t, f_len, 1) =
          logmag.row(src).transpose();
    }
  }
  return out;
}

MlpMaskEstimator::MlpMaskEstimator(MlpModel model) : model_(std::move(model)) {
  model_.validate();
}

TFMask MlpMaskEstimator::estimate(const ComplexSpectrogram& noisy,
                                  const ChannelTruth*) const {
  if (model_.input_dim() != model_.context * noisy.num_bins() ||
      model_.output_dim() != noisy.num_bins())
    throw Error("mask network does not match the spectrogram size");
  const Eigen::MatrixXd y = mlp_forward_batch(model_, mask_features(noisy, model_.context));
  return TFMask(y.transpose());
}

ChannelWeight OracleWeightEstimator::estimate(const PooledFeature& feat,
                                              const ChannelTruth* truth) const {
  if (feat.noisy_pool.size() != feat.mask_pool.size())
    throw Error("weight estimator: feature dimension mismatch");
  if (!truth) throw Error("oracle weight estimator needs ground truth");
  return true_channel_weight(truth->direct, truth->noise);
}

MlpWeightEstimator::MlpWeightEstimator(MlpModel model) : model_(std::move(model)) {
  model_.validate();
  if (model_.output_dim() != 1) throw Error("weight network must have one output");
}

ChannelWeight MlpWeightEstimator::estimate(const PooledFeature& feat,
                                           const ChannelTruth*) const {
  if (feat.noisy_pool.size() + feat.mask_pool.size() != model_.input_dim())
    throw Error("weight estimator: feature dimension mismatch");
  return {mlp_forward(model_, feat.stacked())(0)};
}

// ---------------------------------------------------------------------------

ToyChannel make_toy_channel(const ToyDataConfig& cfg, Rng& rng) {
  RoomSpec room;
  room.length = uniform(rng, 5.0, 10.0);
  room.width = uniform(rng, 5.0, 10.0);
  room.height = uniform(rng, 2.5, 3.5);
  room.t60 = uniform(rng, 0.2, 0.6);

  SceneConfig sc;
  sc.num_mics = 1;
  sc.noise_kind = NoiseKind::kPoint;
  sc.snrato_db = uniform(rng, cfg.snr_min_db, cfg.snr_max_db);
  sc.max_device_delay_s = 0.0;
  sc.room = room;

  const TimeSignal speech = speech_like(cfg.duration_s, cfg.fs, rng);
  const auto type = static_cast<NoiseType>(std::uniform_int_distribution<int>(0, 3)(rng));
  const TimeSignal noise = noise_bank(type, speech.size(), cfg.fs, rng);
  Scene scene = synthesize_scene(speech, noise, sc, rng);
  auto& ch = scene.channels.front();
  return {std::move(ch.observed),
          {std::move(ch.direct), std::move(ch.tail), std::move(ch.noise)}};
}

Dataset make_mask_dataset(std::span<const ToyChannel> channels, int context,
                          const StftConfig& stft_cfg) {
  std::vector<Eigen::MatrixXd> xs, ys;
  Eigen::Index total = 0;
  const OracleMaskEstimator oracle(stft_cfg);
  for (const auto& ch : channels) {
    const ComplexSpectrogram noisy = stft(ch.observed, stft_cfg);
    xs.push_back(mask_features(noisy, context));
    ys.push_back(oracle.estimate(noisy, &ch.truth).values().transpose());
    total += xs.back().cols();
  }
  if (xs.empty()) throw Error("mask dataset: no channels");
  Dataset d;
  d.inputs.resize(xs.front().rows(), total);
  d.targets.resize(ys.front().rows(), total);
  Eigen::Index col = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d.inputs.middleCols(col, xs[i].cols()) = xs[i];
    d.targets.middleCols(col, ys[i].cols()) = ys[i];
    col += xs[i].cols();
  }
  return d;
}

Dataset make_weight_dataset(std::span<const ToyChannel> channels,
                            const MaskEstimator& masks, const StftConfig& stft_cfg) {
  if (channels.empty()) throw Error("weight dataset: no channels");
  const int bins = stft_cfg.num_bins();
  Dataset d;
  d.inputs.resize(2 * bins, static_cast<Eigen::Index>(channels.size()));
  d.targets.resize(1, static_cast<Eigen::Index>(channels.size()));
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto& ch = channels[i];
    const ComplexSpectrogram noisy = stft(ch.observed, stft_cfg);
    const PooledFeature feat = pool_features(noisy.magnitude(), masks.estimate(noisy, &ch.truth));
    d.inputs.col(static_cast<Eigen::Index>(i)) = feat.stacked();
    d.targets(0, static_cast<Eigen::Index>(i)) = true_channel_weight(ch.truth.direct, ch.truth.noise).q;
  }
  return d;
}

}  // namespace dab
