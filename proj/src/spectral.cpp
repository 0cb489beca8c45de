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

#include "dab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

namespace dab {

namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

void validate(const TimeSignal& sig) {
  if (sig.sample_rate <= 0) throw Error("sample rate must be positive");
  for (double v : sig.samples)
    if (!std::isfinite(v)) throw Error("signal contains non-finite samples");
}

double energy(std::span<const double> x) {
  return std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
}

double mean_power(std::span<const double> x) {
  return x.empty() ? 0.0 : energy(x) / static_cast<double>(x.size());
}

Window window_from_string(const std::string& name) {
  if (name == "sqrthann") return Window::kSqrtHann;
  if (name == "hann") return Window::kHann;
  if (name == "hamming") return Window::kHamming;
  if (name == "rect") return Window::kRect;
  throw Error("unknown window: " + name);
}

std::string to_string(Window w) {
  switch (w) {
    case Window::kSqrtHann: return "sqrthann";
    case Window::kHann: return "hann";
    case Window::kHamming: return "hamming";
    case Window::kRect: return "rect";
  }
  return "unknown";
}

std::vector<double> make_window(Window w, int n) {
  std::vector<double> win(n, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(two_pi * i / n);
    switch (w) {
      case Window::kSqrtHann: win[i] = std::sqrt(hann); break;
      case Window::kHann: win[i] = hann; break;
      case Window::kHamming: win[i] = 0.54 - 0.46 * std::cos(two_pi * i / n); break;
      case Window::kRect: break;
    }
  }
  return win;
}

int StftConfig::frame_samples(int fs) const {
  return static_cast<int>(std::lround(frame_ms * fs / 1000.0));
}

int StftConfig::hop_samples(int fs) const {
  return static_cast<int>(std::lround(hop_ms * fs / 1000.0));
}

ComplexSpectrogram::ComplexSpectrogram(CMatrix values, StftLayout layout)
    : values_(std::move(values)), layout_(layout) {
  if (values_.cols() != layout_.num_bins())
    throw Error("spectrogram bin count does not match fft size");
}

RMatrix ComplexSpectrogram::magnitude() const { return values_.cwiseAbs(); }

ComplexSpectrogram ComplexSpectrogram::scaled(double gain) const {
  return ComplexSpectrogram(values_ * gain, layout_);
}

int num_frames_for(std::size_t n, int frame_len, int hop) {
  if (n < static_cast<std::size_t>(frame_len)) return 0;
  return 1 + static_cast<int>((n - frame_len) / hop);
}

// ---------------------------------------------------------------------------
// FFT

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

RealFft::RealFft(int n) : n_(n), impl_(std::make_unique<Impl>()) {
  if (n <= 0) throw Error("fft size must be positive");
  std::lock_guard lock(fftw_planner_mutex());
  impl_->real = fftw_alloc_real(n);
  impl_->spec = fftw_alloc_complex(n / 2 + 1);
  impl_->fwd = fftw_plan_dft_r2c_1d(n, impl_->real, impl_->spec, FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(n, impl_->spec, impl_->real, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard lock(fftw_planner_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->inv);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
}

void RealFft::forward(std::span<const double> in, std::span<Complex> out) {
  const std::size_t n = static_cast<std::size_t>(n_);
  const std::size_t copy = std::min(n, in.size());
  std::copy_n(in.begin(), copy, impl_->real);
  std::fill(impl_->real + copy, impl_->real + n, 0.0);
  fftw_execute(impl_->fwd);
  const auto* src = reinterpret_cast<const Complex*>(impl_->spec);
  std::copy_n(src, std::min(out.size(), n / 2 + 1), out.begin());
}

void RealFft::inverse(std::span<const Complex> in, std::span<double> out) {
  const std::size_t bins = static_cast<std::size_t>(n_ / 2 + 1);
  if (in.size() != bins) throw Error("inverse fft: bin count mismatch");
  std::copy(in.begin(), in.end(), reinterpret_cast<Complex*>(impl_->spec));
  fftw_execute(impl_->inv);  // c2r destroys its input; spec is scratch
  const double scale = 1.0 / n_;
  const std::size_t copy = std::min(out.size(), static_cast<std::size_t>(n_));
  for (std::size_t i = 0; i < copy; ++i) out[i] = impl_->real[i] * scale;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> fft_convolve(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  const std::size_t n = next_pow2(out_len);
  RealFft fft(static_cast<int>(n));
  std::vector<Complex> fa(n / 2 + 1), fb(n / 2 + 1);
  fft.forward(a, fa);
  fft.forward(b, fb);
  for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
  std::vector<double> out(n);
  fft.inverse(fa, out);
  out.resize(out_len);
  return out;
}

// ---------------------------------------------------------------------------
// STFT

ComplexSpectrogram stft(const TimeSignal& sig, const StftConfig& cfg) {
  validate(sig);
  const int fs = sig.sample_rate;
  StftLayout layout{cfg.frame_samples(fs), cfg.hop_samples(fs), cfg.fft_size,
                    fs, cfg.window};
  if (layout.hop <= 0 || layout.frame_len < layout.hop)
    throw Error("stft: need 0 < hop <= frame length");
  if (layout.frame_len > layout.fft_size)
    throw Error("stft: frame longer than fft size");
  const int frames = num_frames_for(sig.size(), layout.frame_len, layout.hop);
  if (frames < 1) throw Error("stft: signal shorter than one frame");

  const std::vector<double> win = make_window(cfg.window, layout.frame_len);
  const int bins = layout.num_bins();
  CMatrix values(frames, bins);
  RealFft fft(layout.fft_size);
  std::vector<double> frame(layout.frame_len);
  std::vector<Complex> spec(bins);
  for (int t = 0; t < frames; ++t) {
    const double* src = sig.samples.data() + static_cast<std::size_t>(t) * layout.hop;
    for (int i = 0; i < layout.frame_len; ++i) frame[i] = src[i] * win[i];
    fft.forward(frame, spec);
    for (int f = 0; f < bins; ++f) values(t, f) = spec[f];
  }
  return ComplexSpectrogram(std::move(values), layout);
}

TimeSignal istft(const ComplexSpectrogram& spec) {
  const StftLayout& layout = spec.layout();
  const int frame_len = layout.frame_len, hop = layout.hop;
  if (hop <= 0 || frame_len < hop || frame_len > layout.fft_size)
    throw Error("istft: invalid frame geometry");

  const std::vector<double> win = make_window(layout.window, frame_len);
  // Constant overlap-add of the analysis*synthesis product.
  std::vector<double> ola(hop, 0.0);
  for (int i = 0; i < frame_len; ++i) ola[i % hop] += win[i] * win[i];
  const auto [lo, hi] = std::minmax_element(ola.begin(), ola.end());
  if (*lo <= 0.0 || (*hi - *lo) > 1e-9 * *hi)
    throw Error("istft: window/hop pair violates overlap-add reconstruction");

  const int frames = spec.num_frames();
  if (frames == 0) return TimeSignal(std::vector<double>{}, layout.sample_rate);
  const std::size_t n = static_cast<std::size_t>(frames - 1) * hop + frame_len;
  std::vector<double> acc(n, 0.0), den(n, 0.0);
  RealFft fft(layout.fft_size);
  std::vector<double> buf(layout.fft_size);
  std::vector<Complex> row(spec.num_bins());
  for (int t = 0; t < frames; ++t) {
    for (int f = 0; f < spec.num_bins(); ++f) row[f] = spec(t, f);
    fft.inverse(row, buf);
    const std::size_t off = static_cast<std::size_t>(t) * hop;
    for (int i = 0; i < frame_len; ++i) {
      acc[off + i] += buf[i] * win[i];
      den[off + i] += win[i] * win[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i) acc[i] = den[i] > 1e-10 ? acc[i] / den[i] : 0.0;
  return TimeSignal(std::move(acc), layout.sample_rate);
}

}  // namespace dab
