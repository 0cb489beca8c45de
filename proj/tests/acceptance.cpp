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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "dab/acoustics.hpp"
#include "dab/beamformer.hpp"
#include "dab/estimation.hpp"
#include "dab/experiment.hpp"
#include "dab/metrics.hpp"
#include "dab/mlp.hpp"
#include "dab/pipeline.hpp"
#include "dab/selection.hpp"
#include "dab/spectral.hpp"
#include "dab/sync.hpp"

using namespace dab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

TimeSignal white(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  TimeSignal s(n, kDefaultSampleRate);
  for (auto& v : s.samples) v = gaussian(rng);
  return s;
}

CVector random_cvec(int m, Rng& rng) {
  CVector v(m);
  for (int i = 0; i < m; ++i) v(i) = Complex(gaussian(rng), gaussian(rng));
  return v;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome distance_study() {
  const auto t0 = Clock::now();
  MonteCarloConfig cfg;
  cfg.shape = FloorShape::kSquare;
  cfg.max_distance_m = 20.0;
  cfg.num_mics = 16;
  cfg.trials = 100000;
  const MonteCarloResult r = monte_carlo_distances(cfg);
  const double secs = seconds_since(t0);
  const double p5 = r.adhoc_best.fraction_above(5.0);
  const bool ok = std::abs(r.conventional.mean_m - 7.28) <= 0.15 * 7.28 &&
                  r.adhoc_avg.std_m < r.conventional.std_m &&
                  std::abs(r.adhoc_best.mean_m - 1.92) <= 0.15 * 1.92 && p5 <= 0.05 && secs < 60;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "conventional mean %.2f m std %.2f, ad-hoc avg std %.2f, best mean %.2f m, "
                "P(best > 5 m) %.2f%%, %.1f s",
                r.conventional.mean_m, r.conventional.std_m, r.adhoc_avg.std_m,
                r.adhoc_best.mean_m, 100 * p5, secs);
  return {ok, buf};
}

Outcome auto_n_equivalence() {
  Rng rng(derive_seed(2, 0));
  int mismatches = 0, draws = 0;
  while (draws < 10000) {
    const int m = 2 + static_cast<int>(rng() % 15);
    const double noise = std::exp(uniform(rng, std::log(0.01), std::log(100.0)));
    const double gamma = std::vector<double>{0.1, 0.5, 0.9}[draws % 3];
    std::vector<double> x(m), q(m);
    for (auto& v : x) v = std::exp(uniform(rng, std::log(0.01), std::log(100.0)));
    const double xs = *std::max_element(x.begin(), x.end());
    bool boundary = false;
    for (double v : x) boundary = boundary || std::abs(v - gamma * xs) <= 1e-6 * xs;
    if (boundary) continue;
    for (int i = 0; i < m; ++i) q[i] = x[i] / (x[i] + noise);
    const SelectionVector p = select_auto_n(q, gamma);
    for (int i = 0; i < m; ++i) {
      if ((p.p[i] > 0) != (x[i] > gamma * xs)) {
        ++mismatches;
        break;
      }
    }
    ++draws;
  }
  return {mismatches == 0, std::to_string(draws) + " draws, " + std::to_string(mismatches) + " mismatches"};
}

Outcome mvdr_correctness() {
  Rng rng(derive_seed(3, 0));
  double worst_distortion = 0.0;
  int optimality_violations = 0;
  for (int inst = 0; inst < 1000; ++inst) {
    const int m = 2 + static_cast<int>(rng() % 7);
    CovMatrix a(m, m);
    for (int i = 0; i < m; ++i) a.col(i) = random_cvec(m, rng);
    const CovMatrix phi = a * a.adjoint();
    const CVector c = random_cvec(m, rng);
    const CVector w = mvdr_weights(phi, c, 0.0);
    worst_distortion = std::max(worst_distortion, std::abs(w.dot(c) - 1.0));
    const double out = (w.adjoint() * phi * w)(0).real();
    for (int k = 0; k < 10000; ++k) {
      const CVector u = random_cvec(m, rng);
      const CVector v = u / std::conj(u.dot(c));
      if ((v.adjoint() * phi * v)(0).real() < out * (1.0 - 1e-9)) {
        ++optimality_violations;
        break;
      }
    }
  }

  // Noise-free rank-1 scene: every channel is a scaled copy of one source.
  const TimeSignal s = white(32000, derive_seed(3, 1));
  const std::vector<double> gains{0.8, -0.3, 1.5, 0.6, 1.1};
  std::vector<TimeSignal> ch;
  for (double g : gains) {
    TimeSignal c = s;
    for (auto& v : c.samples) v *= g;
    ch.push_back(std::move(c));
  }
  const StftConfig cfg;
  const int frames = stft(s, cfg).num_frames();
  const std::vector<TFMask> masks(gains.size(), TFMask(RMatrix::Constant(frames, cfg.num_bins(), 0.5)));
  const std::vector<double> q{0.2, 0.1, 0.9, 0.4, 0.5};
  const EnhanceResult r = enhance(ch, masks, select_all(5), q);
  const std::size_t covered = static_cast<std::size_t>(frames - 1) * 256 + 512;
  double err = 0.0, ref = 0.0;
  for (std::size_t t = 1; t < covered; ++t) {
    err += std::pow(r.output[t] - ch[2][t], 2);
    ref += std::pow(ch[2][t], 2);
  }
  const double rel = std::sqrt(err / ref);
  const bool ok = worst_distortion <= 1e-8 && optimality_violations == 0 && rel <= 1e-6;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "max |w^H c - 1| %.2e, %d optimality violations, rank-1 relative error %.2e",
                worst_distortion, optimality_violations, rel);
  return {ok, buf};
}

Outcome synchronization() {
  const auto t0 = Clock::now();
  SceneSpec spec;
  spec.scene.num_mics = 8;
  spec.scene.noise_kind = NoiseKind::kDiffuse;
  spec.scene.snrato_db = 10.0;
  spec.scene.max_device_delay_s = 0.5;
  const Estimators est = make_estimators("oracle");
  int good = 0, total = 0;
  for (int i = 0; i < 100; ++i) {
    const PreparedScene ps = prepare_scene(make_scene(spec, derive_seed(4, i)), est);
    std::vector<TimeSignal> observed;
    for (const auto& c : ps.scene.channels) observed.push_back(c.observed);
    const SyncResult r = synchronize(observed, ps.q, default_max_lag(ps.scene.sample_rate));
    for (int n = 0; n < 8; ++n) {
      ++total;
      good += std::abs(r.alignment.shifts[n] - ps.scene.true_relative_delay(n, ps.reference)) <= 2;
    }
  }
  const double frac = static_cast<double>(good) / total;

  int exact = 0, shift_total = 0;
  for (int i = 0; i < 20; ++i) {
    Rng rng(derive_seed(4, 1000 + i));
    const TimeSignal s = white(40000, derive_seed(4, 2000 + i));
    std::vector<int> d(6);
    std::vector<TimeSignal> ch;
    std::vector<double> q(6);
    for (int n = 0; n < 6; ++n) {
      d[n] = static_cast<int>(rng() % 8000);
      ch.push_back(delay_signal(s, d[n]));
      q[n] = uniform(rng, 0.1, 0.9);
    }
    const SyncResult r = synchronize(ch, q, 9600);
    const int ref = r.alignment.reference_index;
    for (int n = 0; n < 6; ++n) {
      ++shift_total;
      exact += r.alignment.shifts[n] == d[n] - d[ref];
    }
  }
  const bool ok = frac >= 0.9 && exact == shift_total;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.1f%% of %d channels within 2 samples, pure shifts %d/%d exact, %.1f s",
                100 * frac, total, exact, shift_total, seconds_since(t0));
  return {ok, buf};
}

Outcome end_to_end_ordering() {
  const auto t0 = Clock::now();
  struct Condition {
    const char* name;
    NoiseKind kind;
    double snr;
  };
  bool ok = true;
  std::string detail;
  for (const Condition& c : {Condition{"diffuse 10 dB", NoiseKind::kDiffuse, 10.0},
                             Condition{"point -5 dB", NoiseKind::kPoint, -5.0}}) {
    ExperimentConfig cfg;
    cfg.n_scenes = 50;
    cfg.noise_kind = c.kind;
    cfg.snrato_db = {c.snr};
    cfg.algorithms = {Algorithm::kOneBest, Algorithm::kAll, Algorithm::kAutoN, Algorithm::kRandom};
    cfg.sync_modes = {SyncMode::kNone, SyncMode::kGroundTruth, SyncMode::kEstimated};
    const ExperimentResult r = run_experiment(cfg);
    std::map<std::pair<Algorithm, SyncMode>, std::pair<double, int>> acc;
    for (const auto& row : r.rows) {
      auto& a = acc[{row.algorithm, row.sync_mode}];
      a.first += row.si_sdr_db;
      ++a.second;
    }
    auto mean = [&](Algorithm a, SyncMode s) {
      const auto& v = acc[{a, s}];
      return v.second ? v.first / v.second : -1e9;
    };
    const double ts = mean(Algorithm::kAutoN, SyncMode::kEstimated);
    const double gt = mean(Algorithm::kAutoN, SyncMode::kGroundTruth);
    const double ns = mean(Algorithm::kAll, SyncMode::kNone);
    const double best = mean(Algorithm::kOneBest, SyncMode::kEstimated);
    const double rnd = mean(Algorithm::kRandom, SyncMode::kEstimated);
    const bool cond_ok = r.failures.empty() && ts > ns && std::abs(ts - gt) <= 1.0 && best > rnd;
    ok = ok && cond_ok;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s%s: autoN+sync %.2f, autoN+gt %.2f, all+nosync %.2f, 1best %.2f, random %.2f dB",
                  detail.empty() ? "" : "; ", c.name, ts, gt, ns, best, rnd);
    detail += buf;
    if (!r.failures.empty()) detail += " (" + std::to_string(r.failures.size()) + " failed scenes)";
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 600;
  detail += fmt("; %.1f s", secs);
  return {ok, detail};
}

Outcome spectral_suites() {
  std::vector<std::string> failed;

  const TimeSignal x = white(16000, derive_seed(6, 0));
  const TimeSignal y = istft(stft(x));
  double rt = 0.0;
  for (std::size_t t = 1; t < y.size(); ++t) rt = std::max(rt, std::abs(y[t] - x[t]));
  if (rt > 1e-6) failed.push_back("stft round trip");

  bool shift_ok = true;
  for (int d : {0, 1, 160, 4800, 9000}) {
    const TimeSignal z = white(32000, derive_seed(6, 1 + d));
    shift_ok = shift_ok && gcc_phat(delay_signal(z, d), z, 9600).delay_samples == d;
    shift_ok = shift_ok && gcc_phat(z, delay_signal(z, d), 9600).delay_samples == -d;
  }
  if (!shift_ok) failed.push_back("gcc-phat shift");

  {
    StftLayout l;
    l.fft_size = 2;
    l.frame_len = 2;
    l.hop = 1;
    CMatrix dv(1, 2), tv(1, 2), nv(1, 2);
    dv << Complex(3, 4), Complex(0, 0);
    tv << Complex(1, 0), Complex(0, 0);
    nv << Complex(0, 0), Complex(0, 0);
    const TFMask m = ideal_ratio_mask(ComplexSpectrogram(dv, l), ComplexSpectrogram(tv, l),
                                      ComplexSpectrogram(nv, l));
    bool irm_ok = std::abs(m(0, 0) - 5.0 / 6.0) < 1e-12 && m(0, 1) == 0.0;
    const TimeSignal d = white(8000, derive_seed(6, 20)), h = white(8000, derive_seed(6, 21)),
                     n = white(8000, derive_seed(6, 22));
    const TFMask big = ideal_ratio_mask(stft(d), stft(h), stft(n));
    irm_ok = irm_ok && big.values().minCoeff() >= 0.0 && big.values().maxCoeff() <= 1.0;
    if (!irm_ok) failed.push_back("irm");
  }

  {
    Rng rng(derive_seed(6, 30));
    StftLayout l;
    l.fft_size = 8;
    l.frame_len = 8;
    l.hop = 4;
    const int m = 5, t = 40, f = 5;
    std::vector<ComplexSpectrogram> ys;
    for (int i = 0; i < m; ++i) {
      CMatrix v(t, f);
      for (int a = 0; a < t; ++a)
        for (int b = 0; b < f; ++b) v(a, b) = Complex(gaussian(rng), gaussian(rng));
      ys.emplace_back(std::move(v), l);
    }
    RMatrix w(t, f);
    for (int i = 0; i < w.size(); ++i) w.data()[i] = uniform(rng, 0.0, 1.0);
    const auto phi = weighted_covariance(ys, w);
    double dev = 0.0;
    for (int k = 0; k < f; ++k) {
      CovMatrix naive = CovMatrix::Zero(m, m);
      double ws = 0.0;
      for (int a = 0; a < t; ++a) {
        ws += w(a, k);
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) naive(i, j) += w(a, k) * ys[i](a, k) * std::conj(ys[j](a, k));
      }
      dev = std::max(dev, (phi[k] - naive / ws).cwiseAbs().maxCoeff());
    }
    if (dev > 1e-12) failed.push_back("weighted covariance");
  }

  {
    Rng rng(derive_seed(6, 40));
    MlpModel model = MlpModel::random({6, 5, 4, 3}, 1, rng);
    Eigen::MatrixXd in(6, 10), tg(3, 10);
    for (int i = 0; i < in.size(); ++i) in.data()[i] = gaussian(rng);
    for (int i = 0; i < tg.size(); ++i) tg.data()[i] = uniform(rng, 0.0, 1.0);
    MlpGradients g;
    mlp_loss(model, in, tg, &g);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      auto check = [&](double& p, double analytic) {
        const double keep = p;
        p = keep + h;
        const double up = mlp_loss(model, in, tg);
        p = keep - h;
        const double down = mlp_loss(model, in, tg);
        p = keep;
        worst = std::max(worst, std::abs((up - down) / (2 * h) - analytic));
      };
      auto& layer = model.layers[l];
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i)
        check(layer.weight.data()[i], g.weight[l].data()[i]);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) check(layer.bias(i), g.bias[l](i));
    }
    if (worst > 1e-4) failed.push_back("mlp gradient");
  }

  std::string detail = failed.empty() ? "stft, gcc-phat, irm, covariance and gradient checks hold" : "failed:";
  for (const auto& f : failed) detail += " " + f;
  return {failed.empty(), detail};
}

Outcome gamma_sweep() {
  ExperimentConfig cfg;
  cfg.n_scenes = 10;
  const GammaSweepResult r = run_gamma_sweep(cfg);
  bool ok = r.failures.empty();
  std::string detail;
  for (Algorithm a : {Algorithm::kAutoN, Algorithm::kSoftN, Algorithm::kLearningN}) {
    double prev = 1e9;
    detail += (detail.empty() ? "" : "; ") + to_string(a) + ":";
    for (const auto& row : r.rows) {
      if (row.algorithm != a) continue;
      ok = ok && row.mean_n_selected <= prev;
      prev = row.mean_n_selected;
      detail += fmt(" %.2f", row.mean_n_selected);
    }
  }
  int support_mismatch = 0;
  for (const auto& s : r.scenes) {
    if (s.algorithm != Algorithm::kAutoN) continue;
    for (const auto& o : r.scenes)
      if (o.algorithm == Algorithm::kSoftN && o.scene == s.scene && o.gamma == s.gamma &&
          o.support != s.support)
        ++support_mismatch;
  }
  ok = ok && support_mismatch == 0;
  detail += "; soft/auto support mismatches " + std::to_string(support_mismatch);
  return {ok, detail};
}

Outcome determinism() {
  ExperimentConfig cfg;
  cfg.n_scenes = 4;
  cfg.num_mics = 8;
  cfg.sync_modes = {SyncMode::kNone, SyncMode::kEstimated};
  const std::string a = experiment_csv(run_experiment(cfg));
  const std::string b = experiment_csv(run_experiment(cfg));
  cfg.jobs = 3;
  const std::string c = experiment_csv(run_experiment(cfg));
  const bool ok = a == b && a == c;
  return {ok, std::string("serial runs ") + (a == b ? "identical" : "differ") + ", parallel run " +
                  (a == c ? "identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 distance study", distance_study},
      {"2 auto-N energy equivalence", auto_n_equivalence},
      {"3 MVDR correctness", mvdr_correctness},
      {"4 synchronization", synchronization},
      {"5 end-to-end ordering", end_to_end_ordering},
      {"6 spectral pipeline checks", spectral_suites},
      {"7 gamma sweep", gamma_sweep},
      {"8 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
