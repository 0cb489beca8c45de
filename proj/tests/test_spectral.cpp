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

#include <filesystem>
#include <thread>

#include "dab/sources.hpp"
#include "dab/spectral.hpp"
#include "dab/wav.hpp"
#include "test_util.hpp"

using namespace dab;
using dab::testing::max_abs;
using dab::testing::max_abs_diff;
using dab::testing::white_noise;

TEST_CASE("default config gives 512/256 frames and 257 bins") {
  const StftConfig cfg;
  CHECK(cfg.frame_samples(16000) == 512);
  CHECK(cfg.hop_samples(16000) == 256);
  CHECK(cfg.num_bins() == 257);
}

TEST_CASE("one second at 16 kHz has 61 frames") {
  const auto spec = stft(white_noise(16000, 1));
  CHECK(spec.num_frames() == 61);
  CHECK(spec.num_bins() == 257);
  CHECK(num_frames_for(16000, 512, 256) == 61);
  CHECK(num_frames_for(512, 512, 256) == 1);
}

TEST_CASE("signal shorter than a frame is rejected") {
  CHECK_THROWS_AS(stft(white_noise(511, 1)), Error);
}

TEST_CASE("DC input concentrates in bin 0") {
  TimeSignal dc(std::vector<double>(512, 1.0), 16000);
  const StftConfig rect{32.0, 16.0, 512, Window::kRect};
  const auto spec = stft(dc, rect);
  REQUIRE(spec.num_frames() == 1);
  const double frame_energy = 512.0;
  CHECK(std::abs(spec(0, 0)) == doctest::Approx(512.0));
  for (int k = 1; k < spec.num_bins(); ++k) CHECK(std::norm(spec(0, k)) < 1e-9 * frame_energy);
}

TEST_CASE("1 kHz tone peaks at bin 32") {
  const auto spec = stft(dab::testing::tone(1000.0, 16000));
  for (int t = 0; t < spec.num_frames(); ++t) {
    int best = 0;
    spec.magnitude().row(t).maxCoeff(&best);
    CHECK(best == 32);
  }
}

TEST_CASE("round trip reproduces interior samples") {
  const TimeSignal x = white_noise(16000, 7);
  const TimeSignal y = istft(stft(x));
  REQUIRE(y.size() == 60 * 256 + 512);
  const double err = max_abs_diff(x.samples, y.samples, 512, y.size() - 512);
  CHECK(err < 1e-6 * max_abs(x.samples));
}

TEST_CASE("all-zero spectrogram inverts to silence") {
  const ComplexSpectrogram z(CMatrix::Zero(10, 257), StftLayout{});
  const TimeSignal y = istft(z);
  CHECK(y.size() == 9 * 256 + 512);
  CHECK(max_abs(y.samples) == 0.0);
}

TEST_CASE("energy is preserved through analysis and synthesis") {
  Rng rng(3);
  const TimeSignal x = speech_shaped_noise(48000, 16000, rng);
  const TimeSignal y = istft(stft(x));
  double ex = 0.0, ey = 0.0;
  // Samples 0 and past the last frame are not covered by any full frame.
  for (std::size_t i = 1; i < y.size(); ++i) {
    ex += x[i] * x[i];
    ey += y[i] * y[i];
  }
  CHECK(std::abs(ey - ex) / ex < 1e-3);
}

TEST_CASE("frame energy matches one-sided spectrum energy") {
  const TimeSignal x = white_noise(4096, 11);
  const StftConfig cfg;
  const auto spec = stft(x, cfg);
  const auto win = make_window(cfg.window, 512);
  for (int t = 0; t < spec.num_frames(); ++t) {
    double time_e = 0.0;
    for (int i = 0; i < 512; ++i) {
      const double v = x[t * 256 + i] * win[i];
      time_e += v * v;
    }
    double freq_e = std::norm(spec(t, 0)) + std::norm(spec(t, 256));
    for (int k = 1; k < 256; ++k) freq_e += 2.0 * std::norm(spec(t, k));
    freq_e /= 512.0;
    CHECK(std::abs(freq_e - time_e) < 1e-6 * time_e);
  }
}

TEST_CASE("analysis is linear") {
  const TimeSignal x = white_noise(5000, 1), y = white_noise(5000, 2);
  const double a = 0.7, b = -2.3;
  TimeSignal mix(5000, 16000);
  for (std::size_t i = 0; i < 5000; ++i) mix[i] = a * x[i] + b * y[i];
  const CMatrix lhs = stft(mix).values();
  const CMatrix rhs = a * stft(x).values() + b * stft(y).values();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("synthesis rejects windows without constant overlap-add") {
  const StftConfig hann{32.0, 16.0, 512, Window::kHann};
  CHECK_THROWS_AS(istft(stft(white_noise(4000, 1), hann)), Error);
}

TEST_CASE("concurrent transforms agree with serial ones") {
  const TimeSignal x = white_noise(20000, 5);
  const CMatrix ref = stft(x).values();
  std::vector<CMatrix> out(4);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i) threads.emplace_back([&, i] { out[i] = stft(x).values(); });
  for (auto& t : threads) t.join();
  for (const auto& m : out) CHECK(m == ref);
}

TEST_CASE("invalid samples are rejected") {
  TimeSignal bad(std::vector<double>{0.0, std::nan("")}, 16000);
  CHECK_THROWS_AS(validate(bad), Error);
  CHECK_THROWS_AS(validate(TimeSignal(std::vector<double>{1.0}, 0)), Error);
}

TEST_CASE("fft convolution matches direct summation") {
  const TimeSignal a = white_noise(37, 1), b = white_noise(11, 2);
  const auto c = fft_convolve(a.samples, b.samples);
  REQUIRE(c.size() == 47);
  for (std::size_t n = 0; n < c.size(); ++n) {
    double s = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k)
      if (n >= k && n - k < a.size()) s += a[n - k] * b[k];
    CHECK(c[n] == doctest::Approx(s).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("wav files round trip in both sample formats") {
  const auto dir = std::filesystem::temp_directory_path() / "dab_wav_test";
  std::filesystem::create_directories(dir);
  std::vector<TimeSignal> chans{white_noise(1000, 1, 0.1), white_noise(1000, 2, 0.1)};

  const auto f32 = (dir / "f32.wav").string();
  write_wav(f32, chans, WavFormat::kFloat32);
  const auto back = read_wav(f32);
  REQUIRE(back.size() == 2);
  CHECK(max_abs_diff(back[1].samples, chans[1].samples) < 1e-7);

  const auto pcm = (dir / "pcm.wav").string();
  chans[0][10] = 3.0;  // clips
  const WavWriteStats st = write_wav(pcm, chans, WavFormat::kPcm16);
  CHECK(st.clipped == 1);
  const auto back16 = read_wav(pcm);
  CHECK(back16[0][10] == doctest::Approx(32767.0 / 32768.0));
  CHECK(max_abs_diff(back16[1].samples, chans[1].samples) < 1.0 / 32768.0 + 1e-12);
  std::filesystem::remove_all(dir);
}
