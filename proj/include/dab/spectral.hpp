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

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dab/error.hpp"

namespace dab {

inline constexpr int kDefaultSampleRate = 16000;

using Complex = std::complex<double>;
// Row-major so that one frame (all bins) is contiguous.
using CMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A mono, real-valued time-domain signal.
struct TimeSignal {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  TimeSignal() = default;
  TimeSignal(std::vector<double> s, int fs) : samples(std::move(s)), sample_rate(fs) {}
  TimeSignal(std::size_t n, int fs) : samples(n, 0.0), sample_rate(fs) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double operator[](std::size_t i) const { return samples[i]; }
  double& operator[](std::size_t i) { return samples[i]; }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Throws unless every sample is finite and the rate is positive.
void validate(const TimeSignal& sig);

double energy(std::span<const double> x);
double mean_power(std::span<const double> x);

enum class Window { kSqrtHann, kHann, kHamming, kRect };

Window window_from_string(const std::string& name);
std::string to_string(Window w);

// Periodic window of length n.
std::vector<double> make_window(Window w, int n);

struct StftConfig {
  double frame_ms = 32.0;
  double hop_ms = 16.0;
  int fft_size = 512;
  Window window = Window::kSqrtHann;

  int frame_samples(int fs) const;
  int hop_samples(int fs) const;
  int num_bins() const { return fft_size / 2 + 1; }
};

// Frame geometry carried by every spectrogram so that it can be inverted.
struct StftLayout {
  int frame_len = 512;
  int hop = 256;
  int fft_size = 512;
  int sample_rate = kDefaultSampleRate;
  Window window = Window::kSqrtHann;

  int num_bins() const { return fft_size / 2 + 1; }
  bool operator==(const StftLayout&) const = default;
};

// T x F one-sided complex STFT of a single channel. Values are immutable
// after construction.
class ComplexSpectrogram {
 public:
  ComplexSpectrogram() = default;
  ComplexSpectrogram(CMatrix values, StftLayout layout);

  const CMatrix& values() const { return values_; }
  const StftLayout& layout() const { return layout_; }
  int num_frames() const { return static_cast<int>(values_.rows()); }
  int num_bins() const { return static_cast<int>(values_.cols()); }
  Complex operator()(int t, int f) const { return values_(t, f); }

  RMatrix magnitude() const;
  ComplexSpectrogram scaled(double gain) const;

 private:
  CMatrix values_;
  StftLayout layout_;
};

// Number of full frames that fit in n samples.
int num_frames_for(std::size_t n, int frame_len, int hop);

ComplexSpectrogram stft(const TimeSignal& sig, const StftConfig& cfg = {});

// Overlap-add synthesis. Output length is (T - 1) * hop + frame_len.
// Throws if the window and hop do not satisfy constant overlap-add.
TimeSignal istft(const ComplexSpectrogram& spec);

// Real-input FFT of fixed size backed by FFTW. Plans are created under a
// process-wide lock; execution is reentrant across instances.
class RealFft {
 public:
  explicit RealFft(int n);
  ~RealFft();
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return n_; }
  // in: n real samples (zero-padded if shorter). out: n/2 + 1 bins.
  void forward(std::span<const double> in, std::span<Complex> out);
  // in: n/2 + 1 bins. out: n real samples, scaled by 1/n.
  void inverse(std::span<const Complex> in, std::span<double> out);

 private:
  struct Impl;
  int n_;
  std::unique_ptr<Impl> impl_;
};

// Smallest power of two >= n.
std::size_t next_pow2(std::size_t n);

// Full linear convolution, length a.size() + b.size() - 1.
std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b);

}  // namespace dab
