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

// Feedforward network with rectifier hidden units and sigmoid outputs,
// trained by minibatch SGD with momentum on mean squared error.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dab/error.hpp"
#include "dab/random.hpp"

namespace dab {

struct MlpLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

struct MlpModel {
  std::vector<int> layer_sizes;  // input, hidden..., output
  std::vector<MlpLayer> layers;
  // Frames of context stacked into the input (odd, 1 = none). The network
  // itself is agnostic; feature extraction uses it.
  int context = 1;

  static MlpModel random(std::vector<int> sizes, int context, Rng& rng);
  static MlpModel zeros(std::vector<int> sizes, int context);

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  void validate() const;
};

inline constexpr int kMlpCheckpointVersion = 1;

void save_mlp(const MlpModel& model, const std::string& path);
MlpModel load_mlp(const std::string& path);

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& input);
// Columns are samples.
Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);

struct MlpGradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

// Loss = mean over all samples and outputs of (y - target)^2. Fills grads
// (d loss / d params) when non-null.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets, MlpGradients* grads = nullptr);

struct Dataset {
  Eigen::MatrixXd inputs;   // in x N
  Eigen::MatrixXd targets;  // out x N
  int size() const { return static_cast<int>(inputs.cols()); }
};

struct TrainHyper {
  int epochs = 50;
  int batch_size = 512;
  double lr_start = 0.08;
  double lr_end = 0.001;
  double momentum_early = 0.5;
  double momentum_late = 0.9;
  int momentum_switch_epoch = 5;
  std::uint64_t shuffle_seed = 7;

  // Linear from lr_start at epoch 0 to lr_end at the last epoch.
  double learning_rate(int epoch) const;
  double momentum(int epoch) const;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // full-dataset loss after each epoch
  double initial_loss = 0.0;
};

// Updates `model` in place. Throws Error if the loss becomes non-finite.
TrainReport mlp_train(MlpModel& model, const Dataset& data, const TrainHyper& hyper);

}  // namespace dab
