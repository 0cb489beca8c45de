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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dab/spectral.hpp"

namespace dab {

enum class WavFormat { kPcm16, kFloat32 };

struct WavWriteStats {
  // Samples saturated to the PCM range.
  std::size_t clipped = 0;
};

// Writes an interleaved RIFF/WAVE file. All channels must share length and
// sample rate.
WavWriteStats write_wav(const std::string& path,
                        std::span<const TimeSignal> channels,
                        WavFormat format = WavFormat::kFloat32);

// Reads 16-bit PCM or 32-bit float WAV, one TimeSignal per channel, scaled
// to [-1, 1).
std::vector<TimeSignal> read_wav(const std::string& path);

}  // namespace dab
