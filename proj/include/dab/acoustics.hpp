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

// Scene synthesis for ad-hoc microphone arrays: shoebox image-source room
// impulse responses, diffuse and point-source noise, SNR-at-origin scaling
// and per-device time offsets.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dab/random.hpp"
#include "dab/spectral.hpp"

namespace dab {

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;
  bool operator==(const Point3&) const = default;
};

double distance(const Point3& a, const Point3& b);

struct RoomSpec {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
  double t60 = 0.0;
  double sound_speed = 343.0;

  void validate() const;
  bool contains(const Point3& p) const;  // strictly inside
  double volume() const { return length * width * height; }
  double surface() const {
    return 2.0 * (length * width + length * height + width * height);
  }
};

enum class ArrayKind { kAdhoc, kLinear };
enum class NoiseKind { kDiffuse, kPoint };

std::string to_string(ArrayKind k);
std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);
ArrayKind array_kind_from_string(const std::string& s);

struct ArrayGeometry {
  std::vector<Point3> mic_positions;
  ArrayKind kind = ArrayKind::kAdhoc;
  double aperture_m = 0.10;  // neighbour spacing, linear arrays only

  int num_mics() const { return static_cast<int>(mic_positions.size()); }
};

// Wall reflection coefficient implied by Sabine's formula for this room.
// Zero when t60 == 0. Throws if the room cannot reach t60 (absorption > 1).
double reflection_coefficient(const RoomSpec& room);

// Shoebox image-source impulse response with frequency-independent walls.
// Every image contributes one tap at round(fs * d / c) with gain
// beta^order / (4 pi d). max_order < 0 keeps all images whose path is
// shorter than 1.2 * c * t60; t60 == 0 yields the direct path only.
TimeSignal image_source_rir(const RoomSpec& room, const Point3& src,
                            const Point3& mic, int max_order = -1,
                            int fs = kDefaultSampleRate);

// Length in samples of every RIR image_source_rir produces for this room:
// covers 1.2 * t60 and the room diagonal, whichever is longer.
std::size_t rir_length(const RoomSpec& room, int fs);

// Splits a RIR at first-arrival + boundary_ms. Both parts have the RIR's
// length and sum back to it exactly.
std::pair<TimeSignal, TimeSignal> split_rir(const TimeSignal& rir,
                                            double boundary_ms);

// Test-condition room: [10,20] x [10,20] x [2.7,3.5] m, t60 in [0.4,0.8] s.
RoomSpec sample_test_room(Rng& rng);

// Uniform position inside the room with `margin` to every wall.
Point3 sample_position(const RoomSpec& room, Rng& rng, double margin = 0.1);

// M microphones: i.i.d. uniform (ad-hoc) or a uniformly spaced line with a
// random horizontal orientation (linear). Every microphone keeps at least
// min_source_dist from `avoid`.
ArrayGeometry sample_array(const RoomSpec& room, int num_mics, ArrayKind kind,
                           const Point3& avoid, Rng& rng,
                           double aperture_m = 0.10,
                           double min_source_dist = 0.1);

struct SceneChannel {
  TimeSignal direct;  // direct path + early reflections
  TimeSignal tail;    // late reverberation
  TimeSignal noise;
  double device_delay_s = 0.0;
  int device_delay_samples = 0;
  int direct_arrival_samples = 0;  // round(fs * source-mic distance / c)
  TimeSignal observed;             // shift(direct + tail + noise)
};

struct Scene {
  RoomSpec room;
  Point3 source;
  std::optional<Point3> noise_source;
  ArrayGeometry geometry;
  double snrato_db = 0.0;
  NoiseKind noise_kind = NoiseKind::kDiffuse;
  std::uint64_t seed = 0;
  int sample_rate = kDefaultSampleRate;
  std::vector<SceneChannel> channels;

  int num_mics() const { return static_cast<int>(channels.size()); }
  std::size_t length() const {
    return channels.empty() ? 0 : channels.front().observed.size();
  }
  // Ground-truth delay of channel n relative to channel ref in samples:
  // device offset difference plus direct-path arrival difference.
  int true_relative_delay(int n, int ref) const;
  // Device-only part of true_relative_delay.
  int device_relative_delay(int n, int ref) const;
};

// Delays by d >= 0 samples keeping the length (zeros shifted in).
TimeSignal delay_signal(const TimeSignal& x, int d);

struct SceneConfig {
  int num_mics = 16;
  ArrayKind array_kind = ArrayKind::kAdhoc;
  NoiseKind noise_kind = NoiseKind::kDiffuse;
  double snrato_db = 10.0;
  double max_device_delay_s = 0.5;
  double early_boundary_ms = 50.0;
  std::optional<RoomSpec> room;  // sampled with sample_test_room if unset
};

// Noise power target for SNR-at-origin. For diffuse noise the reference is
// the direct sound 1 m from the source (source power / (4 pi)^2); for point
// noise it is the source power itself. Every signal is rescaled to
// reference / 10^(snrato/10). Throws on zero-power inputs.
std::vector<TimeSignal> scale_for_snrato(double speech_power_ref,
                                         std::vector<TimeSignal> noise,
                                         double snrato_db, NoiseKind kind);

// Builds a Scene. For diffuse noise `noise_bank` is cut into M
// non-overlapping segments (segment m starts at m * scene length); for point
// noise its first speech.size() samples drive a noise source.
Scene synthesize_scene(const TimeSignal& speech, const TimeSignal& noise_bank,
                       const SceneConfig& cfg, Rng& rng);

// Samples needed in the noise bank for synthesize_scene with this speech
// length and room.
std::size_t scene_length(std::size_t speech_len, const RoomSpec& room,
                         double max_device_delay_s, int fs);

// Writes observed/direct/tail/noise WAVs per channel plus manifest.json.
void export_scene(const Scene& scene, const std::string& dir);

// ---------------------------------------------------------------------------
// Distance study for randomly placed speakers and arrays.

enum class FloorShape { kSquare, kRectangle, kCircle };

struct MonteCarloConfig {
  FloorShape shape = FloorShape::kSquare;
  double max_distance_m = 20.0;  // largest distance inside the floor
  int num_mics = 16;
  int trials = 100000;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct DistanceStats {
  double mean_m = 0.0;
  double std_m = 0.0;
  // (distance, P(D <= distance)) on a uniform grid up to max_distance_m.
  std::vector<std::pair<double, double>> cdf;
  std::vector<double> samples;

  double fraction_above(double d) const;
};

struct TrialDistances {
  double conventional = 0.0;
  double adhoc_avg = 0.0;
  double adhoc_best = 0.0;
};

struct MonteCarloResult {
  DistanceStats conventional;
  DistanceStats adhoc_avg;
  DistanceStats adhoc_best;
  std::vector<TrialDistances> trials;
};

DistanceStats make_distance_stats(std::vector<double> samples, double max_d,
                                  int grid_points = 201);

MonteCarloResult monte_carlo_distances(const MonteCarloConfig& cfg);

std::string montecarlo_csv(const MonteCarloResult& r);

}  // namespace dab
