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

#include "dab/sync.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dab/selection.hpp"

namespace dab {

namespace {

// PHAT weighting floor on |cross-spectrum|.
constexpr double kPhatFloor = 1e-12;

}  // namespace

int default_max_lag(int fs) { return static_cast<int>(std::lround(0.6 * fs)); }

DelayEstimate gcc_phat(const TimeSignal& sig, const TimeSignal& ref, int max_lag) {
  if (sig.sample_rate != ref.sample_rate) throw Error("gcc_phat: sample rates differ");
  if (max_lag < 0) throw Error("gcc_phat: negative max lag");
  const std::size_t need = 2 * static_cast<std::size_t>(max_lag);
  if (sig.size() < need || ref.size() < need || sig.empty() || ref.empty())
    throw Error("gcc_phat: signals shorter than twice the max lag");
  if (energy(sig.samples) == 0.0 || energy(ref.samples) == 0.0)
    throw Error("gcc_phat: zero-energy input");

  const std::size_t n = next_pow2(sig.size() + ref.size());
  RealFft fft(static_cast<int>(n));
  std::vector<Complex> xs(n / 2 + 1), xr(n / 2 + 1);
  fft.forward(sig.samples, xs);
  fft.forward(ref.samples, xr);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const Complex g = xs[k] * std::conj(xr[k]);
    xs[k] = g / std::max(std::abs(g), kPhatFloor);
  }
  std::vector<double> r(n);
  fft.inverse(xs, r);

  DelayEstimate est;
  est.peak_value = -std::numeric_limits<double>::infinity();
  const int lag_limit = std::min<int>(max_lag, static_cast<int>(n / 2) - 1);
  for (int lag = -lag_limit; lag <= lag_limit; ++lag) {
    const double v = r[lag >= 0 ? static_cast<std::size_t>(lag) : n - static_cast<std::size_t>(-lag)];
    if (v > est.peak_value) {
      est.peak_value = v;
      est.delay_samples = lag;
    }
  }
  return est;
}

TimeSignal Alignment::apply(const TimeSignal& z, int channel) const {
  const long shift = shifts.at(channel);
  TimeSignal out(length, z.sample_rate);
  for (std::size_t t = 0; t < length; ++t) {
    const long src = static_cast<long>(start + t) + shift;
    if (src >= 0 && static_cast<std::size_t>(src) < z.size()) out[t] = z[src];
  }
  return out;
}

Alignment alignment_from_shifts(std::vector<int> shifts, std::size_t signal_len,
                                int reference_index) {
  if (shifts.empty()) throw Error("alignment: no channels");
  long lo = 0, hi = static_cast<long>(signal_len);
  for (int s : shifts) {
    lo = std::max(lo, -static_cast<long>(s));
    hi = std::min(hi, static_cast<long>(signal_len) - s);
  }
  if (hi <= lo) throw Error("alignment: shifted channels do not overlap");
  Alignment a;
  a.start = static_cast<std::size_t>(lo);
  a.length = static_cast<std::size_t>(hi - lo);
  a.reference_index = reference_index;
  a.failed.assign(shifts.size(), false);
  a.peak_values.assign(shifts.size(), 0.0);
  a.shifts = std::move(shifts);
  return a;
}

SyncResult synchronize(std::span<const TimeSignal> channels, std::span<const double> q,
                       int max_lag) {
  if (channels.empty()) throw Error("synchronize: no channels");
  if (q.size() != channels.size()) throw Error("synchronize: weight count mismatch");
  const std::size_t len = channels[0].size();
  for (const auto& c : channels)
    if (c.size() != len) throw Error("synchronize: channels differ in length");

  const int m = static_cast<int>(channels.size());
  const int ref = argmax_channel(q);
  std::vector<int> shifts(m, 0);
  std::vector<bool> failed(m, false);
  std::vector<double> peaks(m, 0.0);
  std::vector<std::string> warnings;
  for (int n = 0; n < m; ++n) {
    if (n == ref) {
      peaks[n] = 1.0;
      continue;
    }
    try {
      const DelayEstimate e = gcc_phat(channels[n], channels[ref], max_lag);
      shifts[n] = e.delay_samples;
      peaks[n] = e.peak_value;
    } catch (const Error& err) {
      failed[n] = true;
      warnings.push_back("channel " + std::to_string(n) + ": " + err.what());
    }
  }

  SyncResult out;
  out.alignment = alignment_from_shifts(std::move(shifts), len, ref);
  out.alignment.failed = std::move(failed);
  out.alignment.peak_values = std::move(peaks);
  out.alignment.warnings = std::move(warnings);
  for (int n = 0; n < m; ++n) out.aligned.push_back(out.alignment.apply(channels[n], n));
  return out;
}

nlohmann::json delay_report(const Alignment& a, const std::vector<int>* ground_truth) {
  nlohmann::json j;
  j["reference_index"] = a.reference_index;
  j["start"] = a.start;
  j["length"] = a.length;
  nlohmann::json chans = nlohmann::json::array();
  for (int n = 0; n < a.num_channels(); ++n) {
    nlohmann::json c{{"estimated_delay_samples", a.shifts[n]},
                     {"peak_value", a.peak_values[n]},
                     {"failed", static_cast<bool>(a.failed[n])}};
    if (ground_truth) c["ground_truth_delay_samples"] = ground_truth->at(n);
    chans.push_back(std::move(c));
  }
  j["channels"] = std::move(chans);
  return j;
}

}  // namespace dab
