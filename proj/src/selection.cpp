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

#include "dab/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace dab {

namespace {

// Dendrogram levels closer than this are treated as identical.
constexpr double kLifetimeTolerance = 1e-9;

void require_nonempty(std::span<const double> q) {
  if (q.empty()) throw Error("selection: need at least one channel");
}

}  // namespace

int SelectionVector::count() const {
  return static_cast<int>(std::count_if(p.begin(), p.end(), [](double v) { return v > 0; }));
}

std::vector<bool> SelectionVector::support() const {
  std::vector<bool> s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] > 0;
  return s;
}

std::vector<int> SelectionVector::selected() const {
  std::vector<int> idx;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0) idx.push_back(static_cast<int>(i));
  return idx;
}

int argmax_channel(std::span<const double> q) {
  require_nonempty(q);
  return static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
}

SelectionVector select_1best(std::span<const double> q) {
  SelectionVector s{std::vector<double>(q.size(), 0.0)};
  s.p[argmax_channel(q)] = 1.0;
  return s;
}

SelectionVector select_all(int num_channels) {
  if (num_channels < 1) throw Error("selection: need at least one channel");
  return {std::vector<double>(num_channels, 1.0)};
}

int default_fixed_n(int num_channels) {
  return std::max(1, static_cast<int>(std::lround(std::sqrt(num_channels))));
}

SelectionVector select_fixed_n(std::span<const double> q, int n) {
  require_nonempty(q);
  if (n < 1 || n > static_cast<int>(q.size())) throw Error("fixed-N: N out of range");
  std::vector<int> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q[a] > q[b]; });
  SelectionVector s{std::vector<double>(q.size(), 0.0)};
  for (int i = 0; i < n; ++i) s.p[order[i]] = 1.0;
  return s;
}

std::vector<double> odds_ratios(std::span<const double> q) {
  require_nonempty(q);
  const double best = std::clamp(q[argmax_channel(q)], kQClamp, 1.0 - kQClamp);
  std::vector<double> r(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double qi = std::clamp(q[i], kQClamp, 1.0 - kQClamp);
    r[i] = (qi / best) * ((1.0 - best) / (1.0 - qi));
  }
  return r;
}

SelectionVector select_auto_n(std::span<const double> q, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error("auto-N: gamma must lie in [0, 1]");
  const auto r = odds_ratios(q);
  SelectionVector s{std::vector<double>(q.size(), 0.0)};
  for (std::size_t i = 0; i < q.size(); ++i)
    if (r[i] > gamma) s.p[i] = 1.0;
  s.p[argmax_channel(q)] = 1.0;
  return s;
}

SelectionVector select_soft_n(std::span<const double> q, double gamma) {
  SelectionVector s = select_auto_n(q, gamma);
  for (std::size_t i = 0; i < q.size(); ++i)
    if (s.p[i] > 0) s.p[i] = std::clamp(q[i], kQClamp, 1.0);
  return s;
}

ChannelAffinity channel_affinity(std::span<const ComplexSpectrogram> y, double sigma) {
  if (y.empty()) throw Error("affinity: no channels");
  if (!(sigma > 0)) throw Error("affinity: sigma must be positive");
  const int m = static_cast<int>(y.size());
  const int frames = y[0].num_frames(), bins = y[0].num_bins();
  for (const auto& s : y)
    if (s.num_frames() != frames || s.num_bins() != bins)
      throw Error("affinity: spectrogram shapes differ");

  Eigen::MatrixXd k_sum = Eigen::MatrixXd::Zero(m, m);
  int used = 0;
  Eigen::MatrixXcd frame(m, frames);
  for (int f = 0; f < bins; ++f) {
    for (int i = 0; i < m; ++i)
      for (int t = 0; t < frames; ++t) frame(i, t) = y[i](t, f);
    const Eigen::MatrixXcd phi = frame * frame.adjoint();
    bool silent = false;
    for (int i = 0; i < m; ++i) silent = silent || !(phi(i, i).real() > 0);
    if (silent) continue;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        k_sum(i, j) += std::norm(phi(i, j)) / (phi(i, i).real() * phi(j, j).real());
    ++used;
  }
  if (used == 0) throw Error("affinity: every frequency has a silent channel");

  ChannelAffinity out;
  out.used_bins = used;
  out.coherence = k_sum / used;
  out.coherence = 0.5 * (out.coherence + out.coherence.transpose()).eval();
  out.coherence.diagonal().setOnes();
  out.coherence = out.coherence.cwiseMin(1.0).cwiseMax(0.0);
  const Eigen::MatrixXd diff = out.coherence - Eigen::MatrixXd::Identity(m, m);
  out.affinity = (-diff.array().square() / (2.0 * sigma * sigma)).exp().matrix();
  return out;
}

Eigen::MatrixXd spectral_embed(const Eigen::MatrixXd& affinity, int dims) {
  const int m = static_cast<int>(affinity.rows());
  if (m < 1 || affinity.cols() != m) throw Error("spectral_embed: affinity must be square");
  if (dims < 1 || dims > m) throw Error("spectral_embed: J out of range");
  if (m == 1) return Eigen::MatrixXd::Ones(1, 1);

  Eigen::MatrixXd a = 0.5 * (affinity + affinity.transpose());
  a.diagonal().setZero();
  const Eigen::VectorXd degree = a.rowwise().sum();
  Eigen::VectorXd inv_sqrt(m);
  for (int i = 0; i < m; ++i) {
    if (!(degree(i) > 0)) throw Error("spectral_embed: channel with zero affinity");
    inv_sqrt(i) = 1.0 / std::sqrt(degree(i));
  }
  const Eigen::MatrixXd l = inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(l);
  if (eig.info() != Eigen::Success) throw Error("spectral_embed: eigensolver failed");

  // Eigenvalues ascend; take the top J, largest first.
  Eigen::MatrixXd x(m, dims);
  for (int j = 0; j < dims; ++j) {
    Eigen::VectorXd v = eig.eigenvectors().col(m - 1 - j);
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0) v = -v;  // fixed sign convention
    x.col(j) = v;
  }
  for (int i = 0; i < m; ++i) {
    const double n = x.row(i).norm();
    if (n > 0) x.row(i) /= n;
  }
  return x.transpose();
}

Dendrogram average_linkage(const Eigen::MatrixXd& points) {
  const int m = static_cast<int>(points.cols());
  Dendrogram d;
  if (m < 2) return d;
  Eigen::MatrixXd dist(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) dist(i, j) = (points.col(i) - points.col(j)).norm();
  std::vector<int> size(m, 1);
  std::vector<bool> alive(m, true);
  for (int step = 0; step + 1 < m; ++step) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < m; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < m; ++j) {
        if (alive[j] && dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    // Merge bj into bi (Lance-Williams update for average linkage).
    for (int k = 0; k < m; ++k) {
      if (!alive[k] || k == bi || k == bj) continue;
      const double v = (size[bi] * dist(bi, k) + size[bj] * dist(bj, k)) / (size[bi] + size[bj]);
      dist(bi, k) = dist(k, bi) = v;
    }
    size[bi] += size[bj];
    alive[bj] = false;
    d.heights.push_back(d.heights.empty() ? best : std::max(best, d.heights.back()));
    d.merges.emplace_back(bi, bj);
  }
  return d;
}

std::vector<int> lifetime_cluster(const Eigen::MatrixXd& points) {
  const int m = static_cast<int>(points.cols());
  if (m < 1) throw Error("lifetime_cluster: no points");
  if (m == 1) return {0};
  const Dendrogram d = average_linkage(points);

  // Cut after k merges leaves M - k clusters and lives h[k] - h[k-1].
  int cut = m - 1;  // all merged: one cluster
  double longest = kLifetimeTolerance;
  for (int k = 0; k + 1 < m; ++k) {
    const double life = d.heights[k] - (k == 0 ? 0.0 : d.heights[k - 1]);
    if (life > longest) {
      longest = life;
      cut = k;
    }
  }

  std::vector<int> root(m);
  std::iota(root.begin(), root.end(), 0);
  auto find = [&](int x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  for (int k = 0; k < cut; ++k) root[find(d.merges[k].second)] = find(d.merges[k].first);

  std::vector<int> label(m, -1), by_root(m, -1);
  int next = 0;
  for (int i = 0; i < m; ++i) {
    const int r = find(i);
    if (by_root[r] < 0) by_root[r] = next++;
    label[i] = by_root[r];
  }
  return label;
}

SelectionVector select_by_clusters(std::span<const int> assignment,
                                   std::span<const double> q, double gamma,
                                   std::vector<double>* cluster_max_q) {
  require_nonempty(q);
  if (assignment.size() != q.size()) throw Error("cluster selection: size mismatch");
  const int clusters = *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<double> qmax(clusters, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < q.size(); ++i)
    qmax[assignment[i]] = std::max(qmax[assignment[i]], q[i]);
  const SelectionVector cluster_sel = select_auto_n(qmax, gamma);
  SelectionVector s{std::vector<double>(q.size(), 0.0)};
  for (std::size_t i = 0; i < q.size(); ++i)
    if (cluster_sel.p[assignment[i]] > 0) s.p[i] = 1.0;
  if (cluster_max_q) *cluster_max_q = std::move(qmax);
  return s;
}

LearningSelection select_learning_n(std::span<const ComplexSpectrogram> y,
                                    std::span<const double> q, double gamma,
                                    double sigma, int dims) {
  require_nonempty(q);
  if (y.size() != q.size()) throw Error("learning-N: channel count mismatch");
  const int m = static_cast<int>(q.size());
  if (dims == 0) dims = std::max(1, m / 2);
  LearningSelection out;
  out.affinity = channel_affinity(y, sigma);
  out.clusters.embedding = spectral_embed(out.affinity.affinity, dims);
  out.clusters.assignment = lifetime_cluster(out.clusters.embedding);
  out.selection = select_by_clusters(out.clusters.assignment, q, gamma,
                                     &out.clusters.cluster_max_q);
  return out;
}

nlohmann::json selection_json(const std::string& algorithm, const nlohmann::json& params,
                              std::span<const double> q, const SelectionVector& p,
                              const std::vector<int>* clusters) {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["params"] = params;
  j["q"] = std::vector<double>(q.begin(), q.end());
  j["p"] = p.p;
  if (clusters) j["clusters"] = *clusters;
  return j;
}

}  // namespace dab
