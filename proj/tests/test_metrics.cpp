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

#include "dab/metrics.hpp"
#include "test_util.hpp"

using namespace dab;
using dab::testing::white_noise;

namespace {

TimeSignal scaled_sum(const TimeSignal& a, double ka, const TimeSignal& b, double kb) {
  TimeSignal out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ka * a[i] + kb * b[i];
  return out;
}

}  // namespace

TEST_CASE("perfect estimate hits the cap") {
  const TimeSignal s = white_noise(4000, 1);
  CHECK(si_sdr(s, s) == kSiSdrCapDb);
  CHECK(si_sdr(s, TimeSignal(s.size(), s.sample_rate)) == -kSiSdrCapDb);
}

TEST_CASE("scale invariance") {
  const TimeSignal s = white_noise(4000, 2);
  const TimeSignal e = scaled_sum(s, 1.0, white_noise(4000, 3), 0.5);
  const double base = si_sdr(s, e);
  CHECK(si_sdr(s, scaled_sum(e, 3.7, e, 0.0)) == doctest::Approx(base).epsilon(1e-9));
  CHECK(si_sdr(s, scaled_sum(e, -0.2, e, 0.0)) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("equal-power orthogonal noise gives 0 dB") {
  const TimeSignal s = white_noise(200000, 4);
  const TimeSignal n = white_noise(200000, 5);
  CHECK(std::abs(si_sdr(s, scaled_sum(s, 1.0, n, 1.0))) < 0.1);
  CHECK(si_sdr(s, scaled_sum(s, 1.0, n, 0.1)) == doctest::Approx(20.0).epsilon(0.01));
}

TEST_CASE("si-sdr decreases as noise grows") {
  const TimeSignal s = white_noise(8000, 6);
  const TimeSignal n = white_noise(8000, 7);
  double prev = 1e9;
  for (double k : {0.01, 0.1, 0.3, 1.0, 3.0}) {
    const double v = si_sdr(s, scaled_sum(s, 1.0, n, k));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("si-sdr errors") {
  const TimeSignal s = white_noise(100, 8);
  CHECK_THROWS_AS(si_sdr(s, white_noise(99, 9)), Error);
  CHECK_THROWS_AS(si_sdr(TimeSignal(100, kDefaultSampleRate), s), Error);
}

TEST_CASE("snr variant") {
  TimeSignal x(4, kDefaultSampleRate), n(4, kDefaultSampleRate);
  x.samples = {1.0, -1.0, 2.0, 0.0};
  n.samples = {0.5, 0.5, -1.0, 0.0};
  CHECK(snr_variant(x, n) == doctest::Approx(4.0 / 6.0));
  CHECK(snr_variant(x, TimeSignal(4, kDefaultSampleRate)) == 1.0);
}

TEST_CASE("evaluate") {
  const TimeSignal s = white_noise(50000, 10);
  const TimeSignal n = white_noise(50000, 11);
  const EvalResult clean = evaluate(s, scaled_sum(s, 2.0, s, 0.0));
  CHECK(clean.si_sdr_db == kSiSdrCapDb);
  CHECK(clean.snr_variant == doctest::Approx(1.0));
  const EvalResult r = evaluate(s, scaled_sum(s, 1.0, n, 1.0));
  CHECK(r.snr_variant == doctest::Approx(0.5).epsilon(0.02));
  CHECK(evaluate(s, scaled_sum(s, 1.0, n, 0.3)).snr_variant > r.snr_variant);
}
