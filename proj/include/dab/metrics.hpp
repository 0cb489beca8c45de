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

// Evaluation of an enhanced signal against the reference direct sound.

#pragma once

#include <cstdint>
#include <string>

#include "dab/spectral.hpp"

namespace dab {

// Cap on |SI-SDR| for exact or fully orthogonal estimates.
inline constexpr double kSiSdrCapDb = 80.0;

// 10 log10(|a s|^2 / |a s - e|^2) with a = <e, s> / |s|^2. Throws on a
// zero reference or a length mismatch.
double si_sdr(const TimeSignal& reference, const TimeSignal& estimate);

// sum|x| / (sum|x| + sum|n|).
double snr_variant(const TimeSignal& direct, const TimeSignal& residual_noise);

struct EvalResult {
  double si_sdr_db = 0.0;
  double snr_variant = 0.0;
  std::uint64_t seed = 0;
  std::string algorithm;
  double snrato_db = 0.0;
};

// Both metrics for `estimate`; the residual is estimate minus the scaled
// reference from the SI-SDR projection.
EvalResult evaluate(const TimeSignal& reference, const TimeSignal& estimate);

}  // namespace dab
