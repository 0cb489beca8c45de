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

#include "dab/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace dab {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

// Pre-activations and activations of every layer for a batch.
struct ForwardTrace {
  std::vector<Eigen::MatrixXd> pre;
  std::vector<Eigen::MatrixXd> act;  // act[0] is the input
};

ForwardTrace trace_forward(const MlpModel& model, const Eigen::MatrixXd& x) {
  ForwardTrace tr;
  tr.act.push_back(x);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd z = layer.weight * tr.act.back();
    z.colwise() += layer.bias;
    const bool last = l + 1 == model.layers.size();
    tr.act.push_back(last ? sigmoid(z) : relu(z));
    tr.pre.push_back(std::move(z));
  }
  return tr;
}

}  // namespace

MlpModel MlpModel::zeros(std::vector<int> sizes, int context) {
  if (sizes.size() < 2) throw Error("mlp needs at least input and output layers");
  MlpModel m;
  m.layer_sizes = std::move(sizes);
  m.context = context;
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l)
    m.layers.push_back({Eigen::MatrixXd::Zero(m.layer_sizes[l + 1], m.layer_sizes[l]),
                        Eigen::VectorXd::Zero(m.layer_sizes[l + 1])});
  m.validate();
  return m;
}

MlpModel MlpModel::random(std::vector<int> sizes, int context, Rng& rng) {
  MlpModel m = zeros(std::move(sizes), context);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const bool last = l + 1 == m.layers.size();
    const int fan_in = m.layer_sizes[l];
    const int fan_out = m.layer_sizes[l + 1];
    // He for rectifier layers, Glorot for the sigmoid output.
    const double scale = last ? std::sqrt(2.0 / (fan_in + fan_out)) : std::sqrt(2.0 / fan_in);
    auto& w = m.layers[l].weight;
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * gaussian(rng);
  }
  return m;
}

void MlpModel::validate() const {
  if (layer_sizes.size() < 2) throw Error("mlp needs at least input and output layers");
  if (context < 1 || context % 2 == 0) throw Error("mlp context window must be odd");
  if (layers.size() + 1 != layer_sizes.size()) throw Error("mlp layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].weight.rows() != layer_sizes[l + 1] ||
        layers[l].weight.cols() != layer_sizes[l] ||
        layers[l].bias.size() != layer_sizes[l + 1])
      throw Error("mlp layer shape mismatch");
  }
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.input_dim()) throw Error("mlp input dimension mismatch");
  return mlp_forward_batch(model, input).col(0);
}

Eigen::MatrixXd mlp_forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.input_dim()) throw Error("mlp input dimension mismatch");
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Eigen::MatrixXd z = model.layers[l].weight * a;
    z.colwise() += model.layers[l].bias;
    a = l + 1 == model.layers.size() ? sigmoid(z) : relu(z);
  }
  return a;
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& inputs,
                const Eigen::MatrixXd& targets, MlpGradients* grads) {
  if (inputs.rows() != model.input_dim() || targets.rows() != model.output_dim() ||
      inputs.cols() != targets.cols())
    throw Error("mlp loss: dimension mismatch");
  const double count = static_cast<double>(targets.size());
  if (count == 0) throw Error("mlp loss: empty batch");
  ForwardTrace tr = trace_forward(model, inputs);
  const Eigen::MatrixXd diff = tr.act.back() - targets;
  const double loss = diff.squaredNorm() / count;
  if (!grads) return loss;

  const std::size_t layers = model.layers.size();
  grads->weight.assign(layers, {});
  grads->bias.assign(layers, {});
  const Eigen::MatrixXd& y = tr.act.back();
  Eigen::MatrixXd delta =
      (2.0 / count) * diff.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
  for (std::size_t l = layers; l-- > 0;) {
    grads->weight[l] = delta * tr.act[l].transpose();
    grads->bias[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = model.layers[l].weight.transpose() * delta;
    const Eigen::MatrixXd& z = tr.pre[l - 1];
    delta = back.cwiseProduct(z.unaryExpr([](double v) { return v > 0 ? 1.0 : 0.0; }));
  }
  return loss;
}

double TrainHyper::learning_rate(int epoch) const {
  if (epochs <= 1) return lr_start;
  return lr_start + (lr_end - lr_start) * static_cast<double>(epoch) / (epochs - 1);
}

double TrainHyper::momentum(int epoch) const {
  return epoch < momentum_switch_epoch ? momentum_early : momentum_late;
}

TrainReport mlp_train(MlpModel& model, const Dataset& data, const TrainHyper& hyper) {
  model.validate();
  if (data.size() == 0) throw Error("mlp train: empty dataset");
  if (hyper.epochs < 1 || hyper.batch_size < 1) throw Error("mlp train: bad hyperparameters");
  if (data.inputs.rows() != model.input_dim() || data.targets.rows() != model.output_dim() ||
      data.targets.cols() != data.inputs.cols())
    throw Error("mlp train: dataset shape does not match model");

  TrainReport report;
  report.initial_loss = mlp_loss(model, data.inputs, data.targets);

  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(hyper.shuffle_seed);
  const std::size_t layers = model.layers.size();
  std::vector<Eigen::MatrixXd> vel_w(layers);
  std::vector<Eigen::VectorXd> vel_b(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    vel_w[l] = Eigen::MatrixXd::Zero(model.layers[l].weight.rows(), model.layers[l].weight.cols());
    vel_b[l] = Eigen::VectorXd::Zero(model.layers[l].bias.size());
  }
  // mlp_loss averages over outputs too; the update uses the per-sample sum
  // of squared errors (times 1/2) so step sizes do not shrink with width.
  const double grad_scale = 0.5 * model.output_dim();

  MlpGradients g;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double lr = hyper.learning_rate(epoch);
    const double mu = hyper.momentum(epoch);
    for (int start = 0; start < data.size(); start += hyper.batch_size) {
      const int n = std::min(hyper.batch_size, data.size() - start);
      Eigen::MatrixXd xb(data.inputs.rows(), n), yb(data.targets.rows(), n);
      for (int i = 0; i < n; ++i) {
        xb.col(i) = data.inputs.col(order[start + i]);
        yb.col(i) = data.targets.col(order[start + i]);
      }
      const double batch_loss = mlp_loss(model, xb, yb, &g);
      if (!std::isfinite(batch_loss)) {
        std::ostringstream msg;
        msg << "mlp train: non-finite loss at epoch " << epoch << ", batch starting "
            << start << " (lr " << lr << ")";
        throw Error(msg.str());
      }
      for (std::size_t l = 0; l < layers; ++l) {
        vel_w[l] = mu * vel_w[l] - lr * grad_scale * g.weight[l];
        vel_b[l] = mu * vel_b[l] - lr * grad_scale * g.bias[l];
        model.layers[l].weight += vel_w[l];
        model.layers[l].bias += vel_b[l];
      }
    }
    const double loss = mlp_loss(model, data.inputs, data.targets);
    if (!std::isfinite(loss)) throw Error("mlp train: non-finite loss after epoch");
    report.epoch_loss.push_back(loss);
  }
  return report;
}

void save_mlp(const MlpModel& model, const std::string& path) {
  model.validate();
  nlohmann::json j;
  j["format"] = "dab-mlp";
  j["version"] = kMlpCheckpointVersion;
  j["context"] = model.context;
  j["layer_sizes"] = model.layer_sizes;
  j["hidden_activation"] = "relu";
  j["output_activation"] = "sigmoid";
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : model.layers) {
    std::vector<double> w;
    w.reserve(layer.weight.size());
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) w.push_back(layer.weight(r, c));
    layers.push_back({{"weight", w},
                      {"bias", std::vector<double>(layer.bias.data(),
                                                   layer.bias.data() + layer.bias.size())}});
  }
  j["layers"] = std::move(layers);
  std::ofstream os(path);
  if (!os) throw Error("cannot write checkpoint " + path);
  os << j.dump() << "\n";
}

MlpModel load_mlp(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open checkpoint " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("malformed checkpoint " + path + ": " + e.what());
  }
  if (!j.contains("version")) throw Error("checkpoint missing version field");
  if (j["version"].get<int>() != kMlpCheckpointVersion)
    throw Error("unsupported checkpoint version");
  MlpModel m = MlpModel::zeros(j.at("layer_sizes").get<std::vector<int>>(),
                               j.at("context").get<int>());
  const auto& layers = j.at("layers");
  if (layers.size() != m.layers.size()) throw Error("checkpoint layer count mismatch");
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const auto w = layers[l].at("weight").get<std::vector<double>>();
    const auto b = layers[l].at("bias").get<std::vector<double>>();
    auto& layer = m.layers[l];
    if (w.size() != static_cast<std::size_t>(layer.weight.size()) ||
        b.size() != static_cast<std::size_t>(layer.bias.size()))
      throw Error("checkpoint layer shape mismatch");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) layer.weight(r, c) = w[k++];
    for (std::size_t i = 0; i < b.size(); ++i) layer.bias(static_cast<Eigen::Index>(i)) = b[i];
  }
  return m;
}

}  // namespace dab
