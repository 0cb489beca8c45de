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

// Time synchronization: GCC-PHAT relative delays against a reference
// channel and integer-sample alignment onto a common window.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dab/spectral.hpp"

namespace dab {

struct DelayEstimate {
  int delay_samples = 0;   // positive: sig lags ref
  double peak_value = 0.0; // height of the phase-transform correlation peak
  int reference_index = -1;
};

// 0.6 s at fs: device offsets up to 0.5 s plus room propagation.
int default_max_lag(int fs);

// Whole-signal GCC-PHAT with one zero-padded FFT. Throws on silent input or
// if either signal is shorter than 2 * max_lag.
DelayEstimate gcc_phat(const TimeSignal& sig, const TimeSignal& ref, int max_lag);

// y_n(t) = z_n(start + t + shift_n) for t in [0, length).
struct Alignment {
  std::vector<int> shifts;
  std::size_t start = 0;
  std::size_t length = 0;
  int reference_index = 0;
  std::vector<bool> failed;
  std::vector<double> peak_values;
  std::vector<std::string> warnings;

  int num_channels() const { return static_cast<int>(shifts.size()); }
  TimeSignal apply(const TimeSignal& z, int channel) const;
};

// Largest window every shifted channel covers. Throws if it is empty.
Alignment alignment_from_shifts(std::vector<int> shifts, std::size_t signal_len,
                                int reference_index);

struct SyncResult {
  std::vector<TimeSignal> aligned;
  Alignment alignment;
};

// Reference = highest q; every other channel is shifted by its estimated
// delay relative to the reference. Channels whose estimate fails are
// flagged and left unshifted.
SyncResult synchronize(std::span<const TimeSignal> channels, std::span<const double> q,
                       int max_lag);

// Per channel {estimated_delay_samples, ground_truth_delay_samples?, peak_value}.
nlohmann::json delay_report(const Alignment& a, const std::vector<int>* ground_truth = nullptr);

}  // namespace dab
