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

#include "dab/sources.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace dab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTargetRms = 0.05;

void normalize_rms(std::vector<double>& x, double rms) {
  const double p = mean_power(x);
  if (p <= 0) return;
  const double g = rms / std::sqrt(p);
  for (double& v : x) v *= g;
}

// Raised-sine fade in and out over `ramp` samples.
double envelope(std::size_t i, std::size_t len, std::size_t ramp) {
  const std::size_t edge = std::min(i, len - 1 - i);
  if (edge >= ramp) return 1.0;
  const double s = std::sin(0.5 * std::numbers::pi * edge / ramp);
  return s * s;
}

void add_voiced(std::vector<double>& out, std::size_t start, std::size_t len,
                int fs, Rng& rng) {
  const double f0a = uniform(rng, 90.0, 250.0);
  const double f0b = f0a * uniform(rng, 0.8, 1.25);
  const double f1 = uniform(rng, 300.0, 800.0);
  const double f2 = uniform(rng, 900.0, 2500.0);
  const int harmonics = static_cast<int>(3800.0 / std::max(f0a, f0b));
  std::vector<double> phase(harmonics + 1, 0.0);
  for (int k = 1; k <= harmonics; ++k) phase[k] = uniform(rng, 0.0, kTwoPi);
  const std::size_t ramp = static_cast<std::size_t>(0.02 * fs);
  double f0_phase = 0.0;
  for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
    const double frac = static_cast<double>(i) / len;
    const double f0 = f0a + (f0b - f0a) * frac;
    f0_phase += kTwoPi * f0 / fs;
    double v = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      const double fk = k * f0;
      const double gain = (1.0 + 2.0 * std::exp(-std::pow((fk - f1) / 200.0, 2)) +
                           std::exp(-std::pow((fk - f2) / 300.0, 2))) / k;
      v += gain * std::sin(k * f0_phase + phase[k]);
    }
    out[start + i] += v * envelope(i, len, ramp);
  }
}

}  // namespace

TimeSignal speech_shaped_noise(std::size_t n, int fs, Rng& rng) {
  std::vector<double> x(n);
  double lp = 0.0, prev_in = 0.0, hp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lp = 0.8 * lp + gaussian(rng);
    hp = 0.995 * hp + lp - prev_in;
    prev_in = lp;
    x[i] = hp;
  }
  normalize_rms(x, kTargetRms);
  return TimeSignal(std::move(x), fs);
}

TimeSignal speech_like(double duration_s, int fs, Rng& rng) {
  const std::size_t n = static_cast<std::size_t>(std::lround(duration_s * fs));
  std::vector<double> out(n, 0.0);
  std::size_t pos = static_cast<std::size_t>(uniform(rng, 0.02, 0.1) * fs);
  while (pos < n) {
    const std::size_t len = static_cast<std::size_t>(uniform(rng, 0.08, 0.3) * fs);
    const double kind = uniform(rng, 0.0, 1.0);
    if (kind < 0.55) {
      add_voiced(out, pos, len, fs, rng);
    } else if (kind < 0.8) {
      const TimeSignal burst = speech_shaped_noise(len, fs, rng);
      const std::size_t ramp = static_cast<std::size_t>(0.01 * fs);
      // Scale to roughly the level of a voiced segment.
      for (std::size_t i = 0; i < len && pos + i < n; ++i)
        out[pos + i] += 12.0 * burst[i] * envelope(i, len, ramp);
    }
    pos += len;
  }
  normalize_rms(out, kTargetRms);
  return TimeSignal(std::move(out), fs);
}

NoiseType noise_type_from_string(const std::string& s) {
  if (s == "white") return NoiseType::kWhite;
  if (s == "speech-shaped") return NoiseType::kSpeechShaped;
  if (s == "babble") return NoiseType::kBabble;
  if (s == "factory") return NoiseType::kFactory;
  throw Error("unknown noise type: " + s);
}

std::string to_string(NoiseType t) {
  switch (t) {
    case NoiseType::kWhite: return "white";
    case NoiseType::kSpeechShaped: return "speech-shaped";
    case NoiseType::kBabble: return "babble";
    case NoiseType::kFactory: return "factory";
  }
  return "unknown";
}

TimeSignal noise_bank(NoiseType type, std::size_t n, int fs, Rng& rng) {
  std::vector<double> out(n, 0.0);
  switch (type) {
    case NoiseType::kWhite:
      for (double& v : out) v = gaussian(rng);
      break;
    case NoiseType::kSpeechShaped:
      out = speech_shaped_noise(n, fs, rng).samples;
      break;
    case NoiseType::kBabble: {
      constexpr int kTalkers = 6;
      for (int k = 0; k < kTalkers; ++k) {
        const TimeSignal base = speech_shaped_noise(n, fs, rng);
        const double rate = uniform(rng, 3.0, 6.0);
        const double phase = uniform(rng, 0.0, kTwoPi);
        for (std::size_t i = 0; i < n; ++i) {
          const double m = 0.5 * (1.0 + std::sin(kTwoPi * rate * i / fs + phase));
          out[i] += base[i] * m * m;
        }
      }
      break;
    }
    case NoiseType::kFactory: {
      const TimeSignal base = speech_shaped_noise(n, fs, rng);
      for (std::size_t i = 0; i < n; ++i)
        out[i] = base[i] + 0.02 * gaussian(rng) +
                 0.01 * std::sin(kTwoPi * 100.0 * i / fs) +
                 0.005 * std::sin(kTwoPi * 300.0 * i / fs);
      // Impulsive hits: short decaying noise bursts at ~3 per second.
      std::size_t pos = 0;
      while (true) {
        pos += static_cast<std::size_t>(uniform(rng, 0.1, 0.6) * fs);
        if (pos >= n) break;
        const double amp = uniform(rng, 0.1, 0.3);
        const std::size_t len = static_cast<std::size_t>(0.03 * fs);
        for (std::size_t i = 0; i < len && pos + i < n; ++i)
          out[pos + i] += amp * gaussian(rng) * std::exp(-5.0 * i / len);
      }
      break;
    }
  }
  normalize_rms(out, kTargetRms);
  return TimeSignal(std::move(out), fs);
}

}  // namespace dab
