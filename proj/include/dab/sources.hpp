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

// Synthetic test material standing in for speech and noise corpora.

#pragma once

#include <cstddef>
#include <string>

#include "dab/random.hpp"
#include "dab/spectral.hpp"

namespace dab {

// Voiced segments (harmonic complexes with gliding pitch and random formant
// emphasis), unvoiced speech-shaped noise bursts and pauses, at RMS 0.05.
TimeSignal speech_like(double duration_s, int fs, Rng& rng);

// White noise with a low-pass spectral tilt, DC removed.
TimeSignal speech_shaped_noise(std::size_t n, int fs, Rng& rng);

enum class NoiseType { kWhite, kSpeechShaped, kBabble, kFactory };

NoiseType noise_type_from_string(const std::string& s);
std::string to_string(NoiseType t);

TimeSignal noise_bank(NoiseType type, std::size_t n, int fs, Rng& rng);

}  // namespace dab
