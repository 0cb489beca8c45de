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

// Small helpers shared by the unit test binaries.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dab/random.hpp"
#include "dab/spectral.hpp"

namespace dab::testing {

inline TimeSignal white_noise(std::size_t n, std::uint64_t seed, double scale = 1.0,
                              int fs = kDefaultSampleRate) {
  Rng rng(seed);
  TimeSignal s(n, fs);
  for (auto& v : s.samples) v = scale * gaussian(rng);
  return s;
}

inline TimeSignal tone(double hz, std::size_t n, int fs = kDefaultSampleRate) {
  TimeSignal s(n, fs);
  for (std::size_t i = 0; i < n; ++i) s[i] = std::sin(2.0 * M_PI * hz * i / fs);
  return s;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b,
                           std::size_t from = 0, std::size_t to = SIZE_MAX) {
  double m = 0.0;
  to = std::min({to, a.size(), b.size()});
  for (std::size_t i = from; i < to; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace dab::testing
