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

#include "dab/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>

namespace dab {

namespace {

static_assert(std::endian::native == std::endian::little,
              "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("wav: unexpected end of file");
  return v;
}

}  // namespace

WavWriteStats write_wav(const std::string& path,
                        std::span<const TimeSignal> channels,
                        WavFormat format) {
  if (channels.empty()) throw Error("wav: no channels to write");
  const std::size_t len = channels[0].size();
  const int fs = channels[0].sample_rate;
  for (const auto& ch : channels)
    if (ch.size() != len || ch.sample_rate != fs)
      throw Error("wav: channels differ in length or sample rate");

  const std::uint16_t num_ch = static_cast<std::uint16_t>(channels.size());
  const std::uint16_t bits = format == WavFormat::kPcm16 ? 16 : 32;
  const std::uint16_t block = num_ch * bits / 8;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(len * block);

  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("wav: cannot open " + path + " for writing");
  os.write("RIFF", 4);
  put<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put<std::uint32_t>(os, 16);
  put<std::uint16_t>(os, format == WavFormat::kPcm16 ? kFormatPcm : kFormatFloat);
  put<std::uint16_t>(os, num_ch);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(fs));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(fs) * block);
  put<std::uint16_t>(os, block);
  put<std::uint16_t>(os, bits);
  os.write("data", 4);
  put<std::uint32_t>(os, data_bytes);

  WavWriteStats stats;
  for (std::size_t i = 0; i < len; ++i) {
    for (const auto& ch : channels) {
      const double v = ch[i];
      if (format == WavFormat::kFloat32) {
        put<float>(os, static_cast<float>(v));
      } else {
        double scaled = std::round(v * 32768.0);
        if (scaled > 32767.0 || scaled < -32768.0) {
          ++stats.clipped;
          scaled = std::clamp(scaled, -32768.0, 32767.0);
        }
        put<std::int16_t>(os, static_cast<std::int16_t>(scaled));
      }
    }
  }
  if (!os) throw Error("wav: write failed for " + path);
  if (stats.clipped > 0)
    std::cerr << "warning: " << stats.clipped << " samples clipped writing "
              << path << "\n";
  return stats;
}

std::vector<TimeSignal> read_wav(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("wav: cannot open " + path);
  char tag[4];
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "RIFF", 4) != 0) throw Error("wav: not a RIFF file");
  get<std::uint32_t>(is);
  is.read(tag, 4);
  if (!is || std::memcmp(tag, "WAVE", 4) != 0) throw Error("wav: not a WAVE file");

  std::uint16_t fmt = 0, num_ch = 0, bits = 0;
  std::uint32_t fs = 0;
  bool have_fmt = false;
  while (true) {
    is.read(tag, 4);
    if (!is) throw Error("wav: missing data chunk");
    const auto size = get<std::uint32_t>(is);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      fmt = get<std::uint16_t>(is);
      num_ch = get<std::uint16_t>(is);
      fs = get<std::uint32_t>(is);
      get<std::uint32_t>(is);
      get<std::uint16_t>(is);
      bits = get<std::uint16_t>(is);
      if (size > 16) is.ignore(size - 16);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw Error("wav: data chunk before fmt chunk");
      if (num_ch == 0) throw Error("wav: zero channels");
      const bool pcm16 = fmt == kFormatPcm && bits == 16;
      const bool f32 = fmt == kFormatFloat && bits == 32;
      if (!pcm16 && !f32) throw Error("wav: only 16-bit PCM and 32-bit float supported");
      const std::size_t frames = size / (num_ch * bits / 8);
      std::vector<TimeSignal> out(num_ch, TimeSignal(frames, static_cast<int>(fs)));
      for (std::size_t i = 0; i < frames; ++i)
        for (std::uint16_t c = 0; c < num_ch; ++c)
          out[c][i] = pcm16 ? get<std::int16_t>(is) / 32768.0
                            : static_cast<double>(get<float>(is));
      return out;
    } else {
      is.ignore(size + (size & 1));
    }
  }
}

}  // namespace dab
