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

#include "dab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dab/estimation.hpp"

namespace dab {

namespace {

struct Projection {
  double alpha = 0.0;
  double target = 0.0;    // |a s|^2
  double residual = 0.0;  // |a s - e|^2
};

Projection project(const TimeSignal& s, const TimeSignal& e) {
  if (s.size() != e.size()) throw Error("si_sdr: length mismatch");
  const double ss = energy(s.samples);
  if (ss == 0.0) throw Error("si_sdr: zero reference");
  double se = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) se += s[i] * e[i];
  Projection p;
  p.alpha = se / ss;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = p.alpha * s[i];
    p.target += t * t;
    p.residual += (t - e[i]) * (t - e[i]);
  }
  return p;
}

}  // namespace

double si_sdr(const TimeSignal& reference, const TimeSignal& estimate) {
  const Projection p = project(reference, estimate);
  if (p.residual == 0.0) return p.target > 0.0 ? kSiSdrCapDb : -kSiSdrCapDb;
  if (p.target == 0.0) return -kSiSdrCapDb;
  return std::clamp(10.0 * std::log10(p.target / p.residual), -kSiSdrCapDb, kSiSdrCapDb);
}

double snr_variant(const TimeSignal& direct, const TimeSignal& residual_noise) {
  return true_channel_weight(direct, residual_noise).q;
}

EvalResult evaluate(const TimeSignal& reference, const TimeSignal& estimate) {
  const Projection p = project(reference, estimate);
  TimeSignal target(reference.size(), reference.sample_rate);
  TimeSignal residual(reference.size(), reference.sample_rate);
  for (std::size_t i = 0; i < reference.size(); ++i) {
    target[i] = p.alpha * reference[i];
    residual[i] = estimate[i] - target[i];
  }
  EvalResult r;
  r.si_sdr_db = si_sdr(reference, estimate);
  r.snr_variant = (energy(target.samples) + energy(residual.samples) == 0.0)
                      ? 0.0
                      : snr_variant(target, residual);
  return r;
}

}  // namespace dab
