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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dab/acoustics.hpp"
#include "dab/pipeline.hpp"
#include "dab/sync.hpp"
#include "test_util.hpp"

using namespace dab;
using dab::testing::white_noise;

namespace {

TimeSignal add(const TimeSignal& a, const TimeSignal& b) {
  TimeSignal out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

}  // namespace

TEST_CASE("pure delay of white noise") {
  const TimeSignal ref = white_noise(16000, 1);
  const DelayEstimate d = gcc_phat(delay_signal(ref, 160), ref, 1000);
  CHECK(d.delay_samples == 160);
  CHECK(d.peak_value > 0.5);
  CHECK(gcc_phat(ref, ref, 1000).delay_samples == 0);
  CHECK(gcc_phat(ref, ref, 1000).peak_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("delay in heavy noise") {
  const int fs = kDefaultSampleRate;
  const TimeSignal s = white_noise(3 * fs, 2);
  const TimeSignal shifted = delay_signal(s, 4800);
  const TimeSignal a = add(s, white_noise(s.size(), 3));
  const TimeSignal b = add(shifted, white_noise(s.size(), 4));
  const DelayEstimate d = gcc_phat(b, a, default_max_lag(fs));
  CHECK(std::abs(d.delay_samples - 4800) <= 1);
}

TEST_CASE("antisymmetry and shift equivariance") {
  const TimeSignal s = white_noise(20000, 5);
  const TimeSignal a = add(s, white_noise(s.size(), 6, 0.3));
  const TimeSignal b = add(delay_signal(s, 37), white_noise(s.size(), 7, 0.3));
  const int ab = gcc_phat(a, b, 2000).delay_samples;
  const int ba = gcc_phat(b, a, 2000).delay_samples;
  CHECK(ba == 37);
  CHECK(ab == -ba);
  CHECK(gcc_phat(delay_signal(b, 100), a, 2000).delay_samples == ba + 100);
}

TEST_CASE("gcc-phat errors") {
  const TimeSignal s = white_noise(1000, 8);
  CHECK_THROWS_AS(gcc_phat(s, s, 600), Error);
  CHECK_THROWS_AS(gcc_phat(s, s, -1), Error);
  CHECK_THROWS_AS(gcc_phat(TimeSignal(1000, kDefaultSampleRate), s, 100), Error);
  CHECK_THROWS_AS(gcc_phat(s, white_noise(1000, 9, 1.0, 8000), 100), Error);
  CHECK(default_max_lag(16000) == 9600);
}

TEST_CASE("alignment window") {
  const Alignment a = alignment_from_shifts({0, 10, -5}, 100, 0);
  CHECK(a.start == 5);
  CHECK(a.length == 85);
  TimeSignal z(100, kDefaultSampleRate);
  for (std::size_t i = 0; i < 100; ++i) z[i] = static_cast<double>(i);
  const TimeSignal y1 = a.apply(z, 1);
  CHECK(y1.size() == 85);
  CHECK(y1[0] == 15.0);
  CHECK(a.apply(z, 2)[0] == 0.0);
  CHECK(a.apply(z, 2)[84] == 84.0);
  CHECK_THROWS_AS(alignment_from_shifts({0, 100}, 100, 0), Error);
}

TEST_CASE("synchronize recovers pure shifts exactly") {
  const TimeSignal s = white_noise(40000, 10);
  const std::vector<int> delays{300, 0, 1200, 45};
  std::vector<TimeSignal> ch;
  for (int d : delays) ch.push_back(delay_signal(s, d));
  const std::vector<double> q{0.2, 0.4, 0.9, 0.3};
  const SyncResult r = synchronize(ch, q, 2000);
  CHECK(r.alignment.reference_index == 2);
  for (int n = 0; n < 4; ++n) {
    CHECK(r.alignment.shifts[n] == delays[n] - delays[2]);
    CHECK_FALSE(r.alignment.failed[n]);
  }
  for (int n = 0; n < 4; ++n) CHECK(dab::testing::max_abs_diff(r.aligned[n].samples, r.aligned[2].samples) == 0.0);
  CHECK(r.alignment.warnings.empty());

  const std::vector<TimeSignal> single{s};
  const SyncResult one = synchronize(single, std::vector<double>{0.5}, 2000);
  CHECK(one.alignment.shifts == std::vector<int>{0});
  CHECK(one.aligned[0].samples == s.samples);
}

TEST_CASE("silent channel is flagged and left unshifted") {
  const TimeSignal s = white_noise(20000, 11);
  const std::vector<TimeSignal> ch{s, TimeSignal(s.size(), kDefaultSampleRate), delay_signal(s, 20)};
  const SyncResult r = synchronize(ch, std::vector<double>{0.9, 0.1, 0.5}, 1000);
  CHECK(r.alignment.failed[1]);
  CHECK(r.alignment.shifts[1] == 0);
  CHECK(r.alignment.shifts[2] == 20);
  CHECK(r.alignment.warnings.size() == 1);
}

TEST_CASE("delay report") {
  const Alignment a = alignment_from_shifts({0, 3}, 100, 0);
  const std::vector<int> gt{0, 4};
  const auto j = delay_report(a, &gt);
  CHECK(j["reference_index"] == 0);
  CHECK(j["channels"].size() == 2);
  CHECK(j["channels"][1]["estimated_delay_samples"] == 3);
  CHECK(j["channels"][1]["ground_truth_delay_samples"] == 4);
  CHECK_FALSE(delay_report(a)["channels"][1].contains("ground_truth_delay_samples"));
}

TEST_CASE("simulated scenes in a lightly reverberant room") {
  SceneSpec spec;
  spec.scene.num_mics = 8;
  RoomSpec room;
  room.length = 12.0;
  room.width = 10.0;
  room.height = 3.0;
  room.t60 = 0.2;
  spec.scene.room = room;
  spec.scene.noise_kind = NoiseKind::kDiffuse;
  spec.scene.snrato_db = 10.0;
  const Estimators est = make_estimators("oracle");
  int good = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const PreparedScene ps = prepare_scene(make_scene(spec, seed), est);
    const SyncedScene ss = synchronize_scene(ps, SyncMode::kEstimated, est);
    for (int n = 0; n < 8; ++n) {
      ++total;
      good += std::abs(ss.alignment.shifts[n] - ps.scene.true_relative_delay(n, ps.reference)) <= 2;
    }
    const SyncedScene gt = synchronize_scene(ps, SyncMode::kGroundTruth, est);
    for (int n = 0; n < 8; ++n)
      CHECK(gt.alignment.shifts[n] == ps.scene.device_relative_delay(n, ps.reference));
    const SyncedScene none = synchronize_scene(ps, SyncMode::kNone, est);
    CHECK(none.alignment.shifts == std::vector<int>(8, 0));
    CHECK(none.aligned[0].size() == ps.scene.length());
  }
  CHECK(good >= total * 9 / 10);
}
