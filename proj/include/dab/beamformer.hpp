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

// Mask-driven MVDR beamforming over synchronized, selected channels.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dab/estimation.hpp"
#include "dab/selection.hpp"
#include "dab/spectral.hpp"

namespace dab {

using CovMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct MaskProducts {
  RMatrix eta;  // product of masks
  RMatrix xi;   // product of (1 - mask)
};

MaskProducts mask_products(std::span<const TFMask> masks);

// Per frequency: sum_t w(t,f) y(t,f) y(t,f)^H / sum_t w(t,f), symmetrized.
// Frequencies with zero total weight get a zero matrix and a degenerate flag.
std::vector<CovMatrix> weighted_covariance(std::span<const ComplexSpectrogram> y,
                                           const RMatrix& weights,
                                           std::vector<bool>* degenerate = nullptr);

struct CovarianceSet {
  std::vector<CovMatrix> phi_xx;
  std::vector<CovMatrix> phi_nn;
  RMatrix eta;
  RMatrix xi;
};

struct SteeringVector {
  CVector c;
  double eigen_gap = 0.0;       // lambda_1 - lambda_2 (lambda_1 when M = 1)
  bool low_confidence = false;  // top eigenpair (near) degenerate
};

// Relative gap below which the top eigenpair counts as degenerate.
inline constexpr double kEigenGapTol = 1e-10;

// Unit-norm dominant eigenvector with the `ref` component real and
// nonnegative. A degenerate top eigenspace yields the normalized projection
// of e_ref onto it.
SteeringVector principal_steering(const CovMatrix& phi_xx, int ref);

inline constexpr double kDiagonalLoading = 1e-6;

// Phi^-1 c / (c^H Phi^-1 c) with Phi loaded by loading * (trace / M) * I.
// Throws if phi_nn is identically zero or c is zero.
CVector mvdr_weights(const CovMatrix& phi_nn, const CVector& c,
                     double loading = kDiagonalLoading);

// out(t,f) = w(f)^H y(t,f).
ComplexSpectrogram apply_beamformer(std::span<const CVector> w,
                                    std::span<const ComplexSpectrogram> y);

struct FrequencyDiagnostics {
  double condition = 0.0;  // of the loaded noise covariance
  double eigen_gap = 0.0;
  double weight_norm = 0.0;
};

struct BeamformerSolution {
  std::vector<CVector> weights;
  std::vector<CVector> steering;
  std::vector<Complex> reference_gain;  // c_ref(f): maps w^H y back to the reference channel
  std::vector<bool> degenerate;         // passthrough of the reference channel
  std::vector<bool> low_confidence;
  std::vector<FrequencyDiagnostics> diagnostics;
  int reference = 0;  // index into the channels handed to solve_mvdr
  CovarianceSet covariances;

  int num_bins() const { return static_cast<int>(weights.size()); }
};

// y: channels entering the beamformer; eta/xi from all channels' masks.
BeamformerSolution solve_mvdr(std::span<const ComplexSpectrogram> y, const MaskProducts& products,
                              int reference, double loading = kDiagonalLoading,
                              int jobs = 1);

// Beamformer output mapped to the reference channel; degenerate bins copy
// the reference spectrogram.
ComplexSpectrogram beamform_to_reference(const BeamformerSolution& sol,
                                         std::span<const ComplexSpectrogram> y);

struct EnhanceResult {
  TimeSignal output;
  int reference_channel = 0;  // index into the full channel list
  bool bypass = false;        // single selected channel returned directly
  std::optional<BeamformerSolution> solution;
};

// aligned: all M synchronized channels; masks: one per channel. Selected
// channels are scaled by p_i before covariance estimation.
EnhanceResult enhance(std::span<const TimeSignal> aligned, std::span<const TFMask> masks,
                      const SelectionVector& p, std::span<const double> q,
                      const StftConfig& stft_cfg = {}, int jobs = 1);

nlohmann::json beamformer_debug_json(const BeamformerSolution& sol);

}  // namespace dab
