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

#include "dab/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "dab/wav.hpp"

namespace dab {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// Convolves many short filters with one fixed long signal, reusing the
// signal's spectrum.
class FixedConvolver {
 public:
  FixedConvolver(std::span<const double> signal, std::size_t max_filter_len)
      : signal_len_(signal.size()),
        fft_(static_cast<int>(next_pow2(signal.size() + max_filter_len - 1))),
        signal_spec_(fft_.size() / 2 + 1) {
    fft_.forward(signal, signal_spec_);
  }

  // Full convolution, zero-padded or truncated to out_len.
  std::vector<double> convolve(std::span<const double> filter,
                               std::size_t out_len) {
    std::vector<Complex> spec(signal_spec_.size());
    fft_.forward(filter, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= signal_spec_[k];
    std::vector<double> out(fft_.size());
    fft_.inverse(spec, out);
    const std::size_t valid = signal_len_ + filter.size() - 1;
    out.resize(std::min(valid, out.size()));
    out.resize(out_len, 0.0);
    return out;
  }

 private:
  std::size_t signal_len_;
  RealFft fft_;
  std::vector<Complex> signal_spec_;
};

struct AxisImage {
  double delta;  // image coordinate minus microphone coordinate
  int order;     // wall reflections along this axis
};

std::vector<AxisImage> axis_images(double len, double src, double mic,
                                   double radius) {
  std::vector<AxisImage> out;
  const int n_max = static_cast<int>(std::ceil(radius / (2.0 * len))) + 1;
  for (int n = -n_max; n <= n_max; ++n) {
    for (int q = 0; q <= 1; ++q) {
      const double pos = (1 - 2 * q) * src + 2.0 * n * len;
      const double delta = pos - mic;
      if (std::abs(delta) <= radius) out.push_back({delta, std::abs(2 * n - q)});
    }
  }
  return out;
}

double room_diagonal(const RoomSpec& r) {
  return std::sqrt(r.length * r.length + r.width * r.width + r.height * r.height);
}

nlohmann::json to_json(const Point3& p) { return {p.x, p.y, p.z}; }

}  // namespace

double distance(const Point3& a, const Point3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void RoomSpec::validate() const {
  if (!(length > 0 && width > 0 && height > 0))
    throw Error("room dimensions must be positive");
  if (!(t60 >= 0)) throw Error("t60 must be nonnegative");
  if (!(sound_speed > 0)) throw Error("sound speed must be positive");
}

bool RoomSpec::contains(const Point3& p) const {
  return p.x > 0 && p.x < length && p.y > 0 && p.y < width && p.z > 0 &&
         p.z < height;
}

std::string to_string(ArrayKind k) {
  return k == ArrayKind::kAdhoc ? "adhoc" : "linear";
}

std::string to_string(NoiseKind k) {
  return k == NoiseKind::kDiffuse ? "diffuse" : "point";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "diffuse") return NoiseKind::kDiffuse;
  if (s == "point") return NoiseKind::kPoint;
  throw Error("unknown noise kind: " + s);
}

ArrayKind array_kind_from_string(const std::string& s) {
  if (s == "adhoc") return ArrayKind::kAdhoc;
  if (s == "linear") return ArrayKind::kLinear;
  throw Error("unknown array kind: " + s);
}

double reflection_coefficient(const RoomSpec& room) {
  room.validate();
  if (room.t60 == 0.0) return 0.0;
  const double alpha = 24.0 * std::log(10.0) * room.volume() /
                       (room.sound_speed * room.surface() * room.t60);
  if (alpha > 1.0) throw Error("t60 too short for this room (absorption > 1)");
  return std::sqrt(1.0 - alpha);
}

std::size_t rir_length(const RoomSpec& room, int fs) {
  const double reach = std::max(1.2 * room.sound_speed * room.t60, room_diagonal(room));
  return static_cast<std::size_t>(std::floor(reach / room.sound_speed * fs)) + 2;
}

TimeSignal image_source_rir(const RoomSpec& room, const Point3& src,
                            const Point3& mic, int max_order, int fs) {
  room.validate();
  if (fs <= 0) throw Error("sample rate must be positive");
  if (!room.contains(src) || !room.contains(mic))
    throw Error("source and microphone must be inside the room");
  const double direct = distance(src, mic);
  if (direct <= 0.0) throw Error("source and microphone coincide");

  const double c = room.sound_speed;
  TimeSignal rir(rir_length(room, fs), fs);
  const double beta = reflection_coefficient(room);
  if (room.t60 == 0.0 || max_order == 0) {
    rir[static_cast<std::size_t>(std::lround(fs * direct / c))] = 1.0 / (kFourPi * direct);
    return rir;
  }

  const double radius = std::max(1.2 * c * room.t60, direct);
  const auto xs = axis_images(room.length, src.x, mic.x, radius);
  const auto ys = axis_images(room.width, src.y, mic.y, radius);
  const auto zs = axis_images(room.height, src.z, mic.z, radius);

  int top_order = 0;
  for (const auto& v : {&xs, &ys, &zs}) {
    int m = 0;
    for (const auto& a : *v) m = std::max(m, a.order);
    top_order += m;
  }
  std::vector<double> beta_pow(top_order + 1, 1.0);
  for (int k = 1; k <= top_order; ++k) beta_pow[k] = beta_pow[k - 1] * beta;

  const double r2 = radius * radius;
  const double samples_per_m = fs / c;
  for (const auto& ix : xs) {
    const double dx2 = ix.delta * ix.delta;
    for (const auto& iy : ys) {
      const double dxy2 = dx2 + iy.delta * iy.delta;
      if (dxy2 > r2) continue;
      for (const auto& iz : zs) {
        const double d2 = dxy2 + iz.delta * iz.delta;
        if (d2 > r2) continue;
        const int order = ix.order + iy.order + iz.order;
        if (max_order >= 0 && order > max_order) continue;
        const double d = std::sqrt(d2);
        const auto tap = static_cast<std::size_t>(std::lround(d * samples_per_m));
        if (tap < rir.size()) rir[tap] += beta_pow[order] / (kFourPi * d);
      }
    }
  }
  return rir;
}

std::pair<TimeSignal, TimeSignal> split_rir(const TimeSignal& rir,
                                            double boundary_ms) {
  if (!(boundary_ms > 0)) throw Error("split boundary must be positive");
  TimeSignal early(rir.size(), rir.sample_rate), late(rir.size(), rir.sample_rate);
  const auto first = std::find_if(rir.samples.begin(), rir.samples.end(),
                                  [](double v) { return v != 0.0; });
  const std::size_t start = static_cast<std::size_t>(first - rir.samples.begin());
  const std::size_t cut =
      start + static_cast<std::size_t>(std::lround(boundary_ms * rir.sample_rate / 1000.0));
  for (std::size_t i = 0; i < rir.size(); ++i) (i <= cut ? early : late)[i] = rir[i];
  return {std::move(early), std::move(late)};
}

RoomSpec sample_test_room(Rng& rng) {
  RoomSpec r;
  r.length = uniform(rng, 10.0, 20.0);
  r.width = uniform(rng, 10.0, 20.0);
  r.height = uniform(rng, 2.7, 3.5);
  r.t60 = uniform(rng, 0.4, 0.8);
  return r;
}

Point3 sample_position(const RoomSpec& room, Rng& rng, double margin) {
  return {uniform(rng, margin, room.length - margin),
          uniform(rng, margin, room.width - margin),
          uniform(rng, margin, room.height - margin)};
}

ArrayGeometry sample_array(const RoomSpec& room, int num_mics, ArrayKind kind,
                           const Point3& avoid, Rng& rng, double aperture_m,
                           double min_source_dist) {
  if (num_mics < 1) throw Error("array needs at least one microphone");
  ArrayGeometry g;
  g.kind = kind;
  g.aperture_m = aperture_m;
  constexpr int kMaxTries = 10000;
  if (kind == ArrayKind::kAdhoc) {
    for (int m = 0; m < num_mics; ++m) {
      Point3 p;
      int tries = 0;
      do {
        if (++tries > kMaxTries) throw Error("cannot place microphone");
        p = sample_position(room, rng);
      } while (distance(p, avoid) < min_source_dist);
      g.mic_positions.push_back(p);
    }
    return g;
  }
  const double half = 0.5 * aperture_m * (num_mics - 1);
  const double margin = 0.1 + half;
  if (room.length <= 2 * margin || room.width <= 2 * margin)
    throw Error("linear array does not fit in the room");
  for (int tries = 0; tries < kMaxTries; ++tries) {
    const Point3 center{uniform(rng, margin, room.length - margin),
                        uniform(rng, margin, room.width - margin),
                        uniform(rng, 0.1, room.height - 0.1)};
    const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    g.mic_positions.clear();
    bool ok = true;
    for (int m = 0; m < num_mics; ++m) {
      const double off = -half + m * aperture_m;
      Point3 p{center.x + off * std::cos(theta), center.y + off * std::sin(theta), center.z};
      ok = ok && distance(p, avoid) >= min_source_dist;
      g.mic_positions.push_back(p);
    }
    if (ok) return g;
  }
  throw Error("cannot place linear array");
}

int Scene::true_relative_delay(int n, int ref) const {
  const auto& a = channels.at(n);
  const auto& b = channels.at(ref);
  return (a.device_delay_samples + a.direct_arrival_samples) -
         (b.device_delay_samples + b.direct_arrival_samples);
}

int Scene::device_relative_delay(int n, int ref) const {
  return channels.at(n).device_delay_samples - channels.at(ref).device_delay_samples;
}

TimeSignal delay_signal(const TimeSignal& x, int d) {
  if (d < 0) throw Error("delay must be nonnegative");
  TimeSignal out(x.size(), x.sample_rate);
  for (std::size_t i = static_cast<std::size_t>(d); i < x.size(); ++i) out[i] = x[i - d];
  return out;
}

std::vector<TimeSignal> scale_for_snrato(double speech_power_ref,
                                         std::vector<TimeSignal> noise,
                                         double snrato_db, NoiseKind kind) {
  if (!(speech_power_ref > 0)) throw Error("snrato: reference speech power is zero");
  const double ref = kind == NoiseKind::kDiffuse
                         ? speech_power_ref / (kFourPi * kFourPi)
                         : speech_power_ref;
  const double target = ref / std::pow(10.0, snrato_db / 10.0);
  for (auto& n : noise) {
    const double p = mean_power(n.samples);
    if (!(p > 0)) throw Error("snrato: noise signal has zero power");
    const double g = std::sqrt(target / p);
    for (double& v : n.samples) v *= g;
  }
  return noise;
}

std::size_t scene_length(std::size_t speech_len, const RoomSpec& room,
                         double max_device_delay_s, int fs) {
  return speech_len + rir_length(room, fs) - 1 +
         static_cast<std::size_t>(std::lround(max_device_delay_s * fs));
}

Scene synthesize_scene(const TimeSignal& speech, const TimeSignal& noise_bank,
                       const SceneConfig& cfg, Rng& rng) {
  validate(speech);
  if (speech.empty()) throw Error("scene: empty speech signal");
  if (cfg.num_mics < 1) throw Error("scene: need at least one microphone");
  if (cfg.max_device_delay_s < 0) throw Error("scene: negative device delay range");
  const int fs = speech.sample_rate;

  Scene scene;
  scene.room = cfg.room ? *cfg.room : sample_test_room(rng);
  scene.room.validate();
  scene.sample_rate = fs;
  scene.snrato_db = cfg.snrato_db;
  scene.noise_kind = cfg.noise_kind;
  scene.source = sample_position(scene.room, rng);
  scene.geometry = sample_array(scene.room, cfg.num_mics, cfg.array_kind, scene.source, rng);
  if (cfg.noise_kind == NoiseKind::kPoint) {
    Point3 p;
    do {
      p = sample_position(scene.room, rng);
    } while (distance(p, scene.source) < 0.5);
    scene.noise_source = p;
  }

  const int num_mics = cfg.num_mics;
  const std::size_t rir_len = rir_length(scene.room, fs);
  const std::size_t len = scene_length(speech.size(), scene.room, cfg.max_device_delay_s, fs);
  scene.channels.resize(num_mics);
  for (auto& ch : scene.channels) {
    ch.device_delay_s = uniform(rng, 0.0, cfg.max_device_delay_s);
    ch.device_delay_samples = static_cast<int>(std::lround(ch.device_delay_s * fs));
  }

  FixedConvolver speech_conv(speech.samples, rir_len);
  const double c = scene.room.sound_speed;
  for (int m = 0; m < num_mics; ++m) {
    auto& ch = scene.channels[m];
    const Point3& mic = scene.geometry.mic_positions[m];
    const TimeSignal rir = image_source_rir(scene.room, scene.source, mic, -1, fs);
    const auto [early, late] = split_rir(rir, cfg.early_boundary_ms);
    ch.direct = TimeSignal(speech_conv.convolve(early.samples, len), fs);
    ch.tail = TimeSignal(speech_conv.convolve(late.samples, len), fs);
    ch.direct_arrival_samples =
        static_cast<int>(std::lround(fs * distance(scene.source, mic) / c));
  }

  const double speech_power = mean_power(speech.samples);
  if (cfg.noise_kind == NoiseKind::kDiffuse) {
    if (noise_bank.size() < static_cast<std::size_t>(num_mics) * len)
      throw Error("scene: noise bank shorter than M non-overlapping segments");
    std::vector<TimeSignal> segs;
    for (int m = 0; m < num_mics; ++m) {
      const auto first = noise_bank.samples.begin() + static_cast<std::ptrdiff_t>(m * len);
      segs.emplace_back(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(len)), fs);
    }
    if (speech_power > 0) segs = scale_for_snrato(speech_power, std::move(segs), cfg.snrato_db, cfg.noise_kind);
    for (int m = 0; m < num_mics; ++m) scene.channels[m].noise = std::move(segs[m]);
  } else {
    if (noise_bank.size() < speech.size())
      throw Error("scene: noise source shorter than the speech");
    std::vector<TimeSignal> src{TimeSignal(
        std::vector<double>(noise_bank.samples.begin(),
                            noise_bank.samples.begin() + static_cast<std::ptrdiff_t>(speech.size())),
        fs)};
    if (speech_power > 0) src = scale_for_snrato(speech_power, std::move(src), cfg.snrato_db, cfg.noise_kind);
    FixedConvolver noise_conv(src[0].samples, rir_len);
    for (int m = 0; m < num_mics; ++m) {
      const TimeSignal rir = image_source_rir(scene.room, *scene.noise_source,
                                              scene.geometry.mic_positions[m], -1, fs);
      scene.channels[m].noise = TimeSignal(noise_conv.convolve(rir.samples, len), fs);
    }
  }

  for (auto& ch : scene.channels) {
    TimeSignal sum(len, fs);
    for (std::size_t i = 0; i < len; ++i) sum[i] = ch.direct[i] + ch.tail[i] + ch.noise[i];
    ch.observed = delay_signal(sum, ch.device_delay_samples);
  }
  return scene;
}

void export_scene(const Scene& scene, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["seed"] = scene.seed;
  manifest["sample_rate"] = scene.sample_rate;
  manifest["snrato_db"] = scene.snrato_db;
  manifest["noise_kind"] = to_string(scene.noise_kind);
  manifest["room"] = {{"length", scene.room.length}, {"width", scene.room.width},
                      {"height", scene.room.height}, {"t60", scene.room.t60},
                      {"sound_speed", scene.room.sound_speed}};
  manifest["source"] = to_json(scene.source);
  if (scene.noise_source) manifest["noise_source"] = to_json(*scene.noise_source);
  manifest["array_kind"] = to_string(scene.geometry.kind);
  nlohmann::json chans = nlohmann::json::array();
  for (int m = 0; m < scene.num_mics(); ++m) {
    const auto& ch = scene.channels[m];
    char prefix[32];
    std::snprintf(prefix, sizeof(prefix), "ch%02d", m);
    const std::string base = (fs::path(dir) / prefix).string();
    for (const auto& [name, sig] : {std::pair{"observed", &ch.observed},
                                    std::pair{"direct", &ch.direct},
                                    std::pair{"tail", &ch.tail},
                                    std::pair{"noise", &ch.noise}}) {
      write_wav(base + "_" + name + ".wav", std::span(sig, 1), WavFormat::kFloat32);
    }
    chans.push_back({{"position", to_json(scene.geometry.mic_positions[m])},
                     {"device_delay_s", ch.device_delay_s},
                     {"device_delay_samples", ch.device_delay_samples},
                     {"direct_arrival_samples", ch.direct_arrival_samples},
                     {"files", std::string(prefix) + "_{observed,direct,tail,noise}.wav"}});
  }
  manifest["channels"] = std::move(chans);
  std::ofstream(fs::path(dir) / "manifest.json") << manifest.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

namespace {

struct Floor2 {
  FloorShape shape;
  double a = 0.0, b = 0.0;  // rectangle sides or circle radius in a

  std::pair<double, double> sample(Rng& rng) const {
    if (shape != FloorShape::kCircle) return {uniform(rng, 0.0, a), uniform(rng, 0.0, b)};
    while (true) {
      const double x = uniform(rng, -a, a), y = uniform(rng, -a, a);
      if (x * x + y * y <= a * a) return {x, y};
    }
  }
};

Floor2 make_floor(FloorShape shape, double max_d) {
  switch (shape) {
    case FloorShape::kSquare: return {shape, max_d / std::sqrt(2.0), max_d / std::sqrt(2.0)};
    case FloorShape::kRectangle: return {shape, 2.0 * max_d / std::sqrt(5.0), max_d / std::sqrt(5.0)};
    case FloorShape::kCircle: return {shape, max_d / 2.0, 0.0};
  }
  return {shape, 0.0, 0.0};
}

}  // namespace

double DistanceStats::fraction_above(double d) const {
  if (samples.empty()) return 0.0;
  const auto n = std::count_if(samples.begin(), samples.end(), [d](double v) { return v > d; });
  return static_cast<double>(n) / static_cast<double>(samples.size());
}

DistanceStats make_distance_stats(std::vector<double> samples, double max_d,
                                  int grid_points) {
  DistanceStats s;
  const double n = static_cast<double>(samples.size());
  if (samples.empty()) return s;
  s.mean_m = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (double v : samples) var += (v - s.mean_m) * (v - s.mean_m);
  s.std_m = std::sqrt(var / n);
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < grid_points; ++i) {
    const double d = max_d * i / (grid_points - 1);
    const auto k = std::upper_bound(sorted.begin(), sorted.end(), d) - sorted.begin();
    s.cdf.emplace_back(d, static_cast<double>(k) / n);
  }
  s.samples = std::move(samples);
  return s;
}

MonteCarloResult monte_carlo_distances(const MonteCarloConfig& cfg) {
  if (cfg.num_mics < 1 || cfg.trials < 1) throw Error("monte carlo: need M >= 1 and trials >= 1");
  const Floor2 floor = make_floor(cfg.shape, cfg.max_distance_m);
  MonteCarloResult r;
  r.trials.resize(cfg.trials);
  parallel_for(static_cast<std::size_t>(cfg.trials), cfg.jobs, [&](std::size_t i) {
    Rng rng(derive_seed(cfg.seed, i));
    const auto [sx, sy] = floor.sample(rng);
    const auto [cx, cy] = floor.sample(rng);
    TrialDistances t;
    t.conventional = std::hypot(sx - cx, sy - cy);
    double sum = 0.0, best = std::numeric_limits<double>::infinity();
    for (int m = 0; m < cfg.num_mics; ++m) {
      const auto [mx, my] = floor.sample(rng);
      const double d = std::hypot(sx - mx, sy - my);
      sum += d;
      best = std::min(best, d);
    }
    t.adhoc_avg = sum / cfg.num_mics;
    t.adhoc_best = best;
    r.trials[i] = t;
  });
  std::vector<double> conv, avg, best;
  for (const auto& t : r.trials) {
    conv.push_back(t.conventional);
    avg.push_back(t.adhoc_avg);
    best.push_back(t.adhoc_best);
  }
  r.conventional = make_distance_stats(std::move(conv), cfg.max_distance_m);
  r.adhoc_avg = make_distance_stats(std::move(avg), cfg.max_distance_m);
  r.adhoc_best = make_distance_stats(std::move(best), cfg.max_distance_m);
  return r;
}

std::string montecarlo_csv(const MonteCarloResult& r) {
  std::string out = "trial,d_conventional,d_adhoc_avg,d_adhoc_best\n";
  char line[128];
  for (std::size_t i = 0; i < r.trials.size(); ++i) {
    const auto& t = r.trials[i];
    std::snprintf(line, sizeof(line), "%zu,%.6f,%.6f,%.6f\n", i, t.conventional,
                  t.adhoc_avg, t.adhoc_best);
    out += line;
  }
  return out;
}

}  // namespace dab
