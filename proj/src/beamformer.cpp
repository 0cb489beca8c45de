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

#include "dab/beamformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dab/random.hpp"

namespace dab {

MaskProducts mask_products(std::span<const TFMask> masks) {
  if (masks.empty()) throw Error("mask_products: no masks");
  const int t = masks[0].num_frames(), f = masks[0].num_bins();
  MaskProducts out{RMatrix::Ones(t, f), RMatrix::Ones(t, f)};
  for (const auto& m : masks) {
    if (m.num_frames() != t || m.num_bins() != f) throw Error("mask_products: shape mismatch");
    out.eta.array() *= m.values().array();
    out.xi.array() *= 1.0 - m.values().array();
  }
  return out;
}

namespace {

void check_channels(std::span<const ComplexSpectrogram> y) {
  if (y.empty()) throw Error("beamformer: no channels");
  for (const auto& s : y) {
    if (s.num_frames() != y[0].num_frames() || s.num_bins() != y[0].num_bins() ||
        !(s.layout() == y[0].layout()))
      throw Error("beamformer: channel spectrograms differ in shape");
  }
}

// M x T snapshot matrix at one frequency.
Eigen::MatrixXcd snapshots(std::span<const ComplexSpectrogram> y, int f) {
  const int m = static_cast<int>(y.size()), t = y[0].num_frames();
  Eigen::MatrixXcd s(m, t);
  for (int i = 0; i < m; ++i) s.row(i) = y[i].values().col(f).transpose();
  return s;
}

CovMatrix covariance_at(const Eigen::MatrixXcd& snaps, const RMatrix& weights, int f,
                        bool* degenerate) {
  const Eigen::VectorXd w = weights.col(f);
  const double total = w.sum();
  const auto m = snaps.rows();
  if (!(total > 0.0)) {
    *degenerate = true;
    return CovMatrix::Zero(m, m);
  }
  *degenerate = false;
  CovMatrix phi = (snaps * w.asDiagonal() * snaps.adjoint()) / total;
  return (0.5 * (phi + phi.adjoint())).eval();
}

void phase_normalize(CVector& c, int ref) {
  int anchor = ref;
  if (std::abs(c(ref)) == 0.0) c.cwiseAbs().maxCoeff(&anchor);
  const double mag = std::abs(c(anchor));
  if (mag > 0.0) c *= std::conj(c(anchor)) / mag;
  c(anchor) = std::abs(c(anchor));
}

}  // namespace

std::vector<CovMatrix> weighted_covariance(std::span<const ComplexSpectrogram> y,
                                           const RMatrix& weights,
                                           std::vector<bool>* degenerate) {
  check_channels(y);
  const int t = y[0].num_frames(), f = y[0].num_bins();
  if (weights.rows() != t || weights.cols() != f)
    throw Error("weighted_covariance: weight shape mismatch");
  std::vector<CovMatrix> out(f);
  if (degenerate) degenerate->assign(f, false);
  for (int k = 0; k < f; ++k) {
    bool deg = false;
    out[k] = covariance_at(snapshots(y, k), weights, k, &deg);
    if (degenerate) (*degenerate)[k] = deg;
  }
  return out;
}

SteeringVector principal_steering(const CovMatrix& phi_xx, int ref) {
  const auto m = phi_xx.rows();
  if (m == 0 || phi_xx.cols() != m) throw Error("principal_steering: matrix must be square");
  if (ref < 0 || ref >= m) throw Error("principal_steering: reference out of range");
  Eigen::SelfAdjointEigenSolver<CovMatrix> es(phi_xx);
  if (es.info() != Eigen::Success) throw Error("principal_steering: eigensolver failed");
  const Eigen::VectorXd& lam = es.eigenvalues();  // ascending
  const double top = lam(m - 1);
  SteeringVector sv;
  sv.eigen_gap = m > 1 ? top - lam(m - 2) : top;
  const double scale = std::abs(top);
  sv.low_confidence = !(top > 0.0) || (m > 1 && sv.eigen_gap < kEigenGapTol * scale);

  if (!sv.low_confidence) {
    sv.c = es.eigenvectors().col(m - 1);
  } else {
    // Project e_ref onto the eigenvectors sharing the top eigenvalue.
    CVector proj = CVector::Zero(m);
    for (Eigen::Index j = m - 1; j >= 0; --j) {
      if (top - lam(j) > kEigenGapTol * scale) break;
      const CVector v = es.eigenvectors().col(j);
      proj += v * std::conj(v(ref));
    }
    if (proj.norm() > 0.0) {
      sv.c = proj / proj.norm();
    } else {
      sv.c = CVector::Zero(m);
      sv.c(ref) = 1.0;
    }
  }
  sv.c /= sv.c.norm();
  phase_normalize(sv.c, ref);
  return sv;
}

CVector mvdr_weights(const CovMatrix& phi_nn, const CVector& c, double loading) {
  const auto m = phi_nn.rows();
  if (phi_nn.cols() != m || c.size() != m) throw Error("mvdr_weights: dimension mismatch");
  if (phi_nn.isZero(0.0)) throw Error("mvdr_weights: noise covariance is identically zero");
  if (c.isZero(0.0)) throw Error("mvdr_weights: zero steering vector");
  const double tr = phi_nn.diagonal().real().sum();
  CovMatrix loaded = phi_nn;
  loaded.diagonal().array() += loading * std::abs(tr) / static_cast<double>(m);
  const CVector x = loaded.ldlt().solve(c);
  const Complex denom = c.dot(x);  // c^H x
  if (std::abs(denom) == 0.0 || !std::isfinite(std::abs(denom)))
    throw Error("mvdr_weights: singular noise covariance");
  return x / std::conj(denom);
}

ComplexSpectrogram apply_beamformer(std::span<const CVector> w,
                                    std::span<const ComplexSpectrogram> y) {
  check_channels(y);
  const int t = y[0].num_frames(), f = y[0].num_bins();
  if (static_cast<int>(w.size()) != f) throw Error("apply_beamformer: weight count mismatch");
  CMatrix out = CMatrix::Zero(t, f);
  for (int k = 0; k < f; ++k) {
    if (w[k].size() != static_cast<Eigen::Index>(y.size()))
      throw Error("apply_beamformer: weight length mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) {
      const Complex wc = std::conj(w[k](static_cast<Eigen::Index>(i)));
      out.col(k) += wc * y[i].values().col(k);
    }
  }
  return ComplexSpectrogram(std::move(out), y[0].layout());
}

BeamformerSolution solve_mvdr(std::span<const ComplexSpectrogram> y, const MaskProducts& products,
                              int reference, double loading, int jobs) {
  check_channels(y);
  const int m = static_cast<int>(y.size()), f = y[0].num_bins();
  if (reference < 0 || reference >= m) throw Error("solve_mvdr: reference out of range");
  if (products.eta.rows() != y[0].num_frames() || products.eta.cols() != f ||
      products.xi.rows() != products.eta.rows() || products.xi.cols() != f)
    throw Error("solve_mvdr: mask products do not match the spectrograms");

  BeamformerSolution sol;
  sol.reference = reference;
  sol.weights.assign(f, CVector::Zero(m));
  sol.steering.assign(f, CVector::Zero(m));
  sol.reference_gain.assign(f, Complex(0.0));
  sol.diagnostics.assign(f, {});
  sol.covariances.phi_xx.resize(f);
  sol.covariances.phi_nn.resize(f);
  sol.covariances.eta = products.eta;
  sol.covariances.xi = products.xi;
  std::vector<char> degenerate(f, 0), low(f, 0);

  parallel_for(static_cast<std::size_t>(f), jobs, [&](std::size_t idx) {
    const int k = static_cast<int>(idx);
    const Eigen::MatrixXcd snaps = snapshots(y, k);
    bool dx = false, dn = false;
    sol.covariances.phi_xx[k] = covariance_at(snaps, products.eta, k, &dx);
    sol.covariances.phi_nn[k] = covariance_at(snaps, products.xi, k, &dn);
    const CovMatrix& pxx = sol.covariances.phi_xx[k];
    const CovMatrix& pnn = sol.covariances.phi_nn[k];
    if (dx || dn || pxx.isZero(0.0) || pnn.isZero(0.0)) {
      degenerate[k] = 1;
      sol.weights[k](reference) = 1.0;
      sol.reference_gain[k] = 1.0;
      return;
    }
    const SteeringVector sv = principal_steering(pxx, reference);
    sol.steering[k] = sv.c;
    low[k] = sv.low_confidence;
    sol.weights[k] = mvdr_weights(pnn, sv.c, loading);
    sol.reference_gain[k] = sv.c(reference);

    CovMatrix loaded = pnn;
    loaded.diagonal().array() += loading * std::abs(pnn.diagonal().real().sum()) / m;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<CovMatrix>(loaded, Eigen::EigenvaluesOnly).eigenvalues();
    auto& d = sol.diagnostics[k];
    d.condition = ev(0) > 0.0 ? ev(m - 1) / ev(0) : std::numeric_limits<double>::infinity();
    d.eigen_gap = sv.eigen_gap;
    d.weight_norm = sol.weights[k].norm();
  });
  sol.degenerate.assign(degenerate.begin(), degenerate.end());
  sol.low_confidence.assign(low.begin(), low.end());
  return sol;
}

ComplexSpectrogram beamform_to_reference(const BeamformerSolution& sol,
                                         std::span<const ComplexSpectrogram> y) {
  const ComplexSpectrogram raw = apply_beamformer(sol.weights, y);
  CMatrix out = raw.values();
  for (int k = 0; k < raw.num_bins(); ++k) {
    if (sol.degenerate[k])
      out.col(k) = y[sol.reference].values().col(k);
    else
      out.col(k) *= sol.reference_gain[k];
  }
  return ComplexSpectrogram(std::move(out), raw.layout());
}

EnhanceResult enhance(std::span<const TimeSignal> aligned, std::span<const TFMask> masks,
                      const SelectionVector& p, std::span<const double> q,
                      const StftConfig& stft_cfg, int jobs) {
  const int m = static_cast<int>(aligned.size());
  if (m == 0) throw Error("enhance: no channels");
  if (static_cast<int>(masks.size()) != m || p.size() != m || static_cast<int>(q.size()) != m)
    throw Error("enhance: channel count mismatch");
  const std::vector<int> sel = p.selected();
  if (sel.empty()) throw Error("enhance: no channel selected");

  int ref_full = sel.front();
  for (int i : sel)
    if (q[i] > q[ref_full]) ref_full = i;

  EnhanceResult res;
  res.reference_channel = ref_full;
  if (sel.size() == 1) {
    res.bypass = true;
    res.output = aligned[ref_full];
    return res;
  }

  std::vector<ComplexSpectrogram> y;
  y.reserve(sel.size());
  int ref_local = 0;
  for (std::size_t j = 0; j < sel.size(); ++j) {
    if (sel[j] == ref_full) ref_local = static_cast<int>(j);
    y.push_back(stft(aligned[sel[j]], stft_cfg).scaled(p.p[sel[j]]));
  }
  BeamformerSolution sol = solve_mvdr(y, mask_products(masks), ref_local, kDiagonalLoading, jobs);
  TimeSignal out = istft(beamform_to_reference(sol, y));
  out.samples.resize(aligned[ref_full].size(), 0.0);
  res.output = std::move(out);
  res.solution = std::move(sol);
  return res;
}

nlohmann::json beamformer_debug_json(const BeamformerSolution& sol) {
  nlohmann::json bins = nlohmann::json::array();
  for (int k = 0; k < sol.num_bins(); ++k) {
    const auto& d = sol.diagnostics[k];
    bins.push_back({{"bin", k},
                    {"degenerate", static_cast<bool>(sol.degenerate[k])},
                    {"low_confidence", static_cast<bool>(sol.low_confidence[k])},
                    {"condition", std::isfinite(d.condition) ? nlohmann::json(d.condition)
                                                             : nlohmann::json(nullptr)},
                    {"eigen_gap", d.eigen_gap},
                    {"weight_norm", d.weight_norm}});
  }
  return {{"reference", sol.reference}, {"bins", std::move(bins)}};
}

}  // namespace dab
