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

// Channel selection: maps per-channel quality weights q (and, for the
// clustering variant, synchronized spectrograms) to a selection vector p.
// Ties always resolve to the lowest channel index.

#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dab/spectral.hpp"

namespace dab {

struct SelectionVector {
  std::vector<double> p;

  int size() const { return static_cast<int>(p.size()); }
  int count() const;                  // entries > 0
  std::vector<bool> support() const;  // p_i > 0
  std::vector<int> selected() const;  // indices with p_i > 0
};

// Lowest index among the maxima of q.
int argmax_channel(std::span<const double> q);

SelectionVector select_1best(std::span<const double> q);
SelectionVector select_all(int num_channels);

// round(sqrt(M)), at least 1.
int default_fixed_n(int num_channels);
SelectionVector select_fixed_n(std::span<const double> q, int n);

// q is clamped to [kQClamp, 1 - kQClamp] before the odds ratio is formed.
inline constexpr double kQClamp = 1e-9;

// (q_i / q_*) * ((1 - q_*) / (1 - q_i)) for every channel.
std::vector<double> odds_ratios(std::span<const double> q);

// p_i = 1 iff odds ratio > gamma; the argmax channel is always kept.
SelectionVector select_auto_n(std::span<const double> q, double gamma);
// Same support as select_auto_n, surviving entries carry q_i.
SelectionVector select_soft_n(std::span<const double> q, double gamma);

struct ChannelAffinity {
  Eigen::MatrixXd coherence;  // K: frequency-averaged normalized |Phi|^2
  Eigen::MatrixXd affinity;   // A = exp(-(K - I)^2 / (2 sigma^2)), elementwise
  int used_bins = 0;
};

// Frequencies where any channel has zero energy are left out of the average.
ChannelAffinity channel_affinity(std::span<const ComplexSpectrogram> y, double sigma);

// J x M embedding (column i = channel i): top-J eigenvectors of the
// normalized affinity D^-1/2 A D^-1/2 (diagonal zeroed), rows of the
// eigenvector matrix normalized to unit length.
Eigen::MatrixXd spectral_embed(const Eigen::MatrixXd& affinity, int dims);

struct Dendrogram {
  std::vector<double> heights;                 // nondecreasing, M - 1 merges
  std::vector<std::pair<int, int>> merges;     // cluster ids merged at each step
};

// Average-linkage agglomerative clustering on Euclidean distances between
// columns of `points`.
Dendrogram average_linkage(const Eigen::MatrixXd& points);

// Cuts the dendrogram at its longest-lived level. Returns a cluster label
// per column, labels numbered by first appearance.
std::vector<int> lifetime_cluster(const Eigen::MatrixXd& points);

struct ClusterEmbedding {
  Eigen::MatrixXd embedding;            // J x M
  std::vector<int> assignment;          // cluster label per channel
  std::vector<double> cluster_max_q;    // q'_b
  int num_clusters() const { return static_cast<int>(cluster_max_q.size()); }
};

struct LearningSelection {
  SelectionVector selection;
  ClusterEmbedding clusters;
  ChannelAffinity affinity;
};

// Cluster-level odds-ratio rule. `dims` = 0 means M / 2 (at least 1).
LearningSelection select_learning_n(std::span<const ComplexSpectrogram> y,
                                    std::span<const double> q, double gamma,
                                    double sigma = 1.0, int dims = 0);

// Cluster-level rule on a given assignment; exposed for testing.
SelectionVector select_by_clusters(std::span<const int> assignment,
                                   std::span<const double> q, double gamma,
                                   std::vector<double>* cluster_max_q = nullptr);

nlohmann::json selection_json(const std::string& algorithm,
                              const nlohmann::json& params,
                              std::span<const double> q, const SelectionVector& p,
                              const std::vector<int>* clusters = nullptr);

}  // namespace dab
