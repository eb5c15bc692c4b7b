// core/src/wav.cc

// Copyright 2026  Vectorscope Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "vectorscope/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "vectorscope/common.hpp"

namespace vectorscope {

namespace {

std::uint32_t ReadU32Le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t ReadU16Le(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void PutU32Le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void PutU16Le(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), "cannot open WAV file '", path, "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  Require(bytes.size() >= 44, "'", path, "': too short to be a WAV file");
  Require(std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          "'", path, "': not a RIFF/WAVE file");

  int channels = 0;
  int sample_rate = 0;
  int bits = 0;
  int format = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t chunk_len = ReadU32Le(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_len > bytes.size()) break;
    if (std::memcmp(id, "fmt ", 4) == 0 && chunk_len >= 16) {
      format = ReadU16Le(bytes.data() + body);
      channels = ReadU16Le(bytes.data() + body + 2);
      sample_rate = static_cast<int>(ReadU32Le(bytes.data() + body + 4));
      bits = ReadU16Le(bytes.data() + body + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
    }
    pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }

  Require(data != nullptr, "'", path, "': no data chunk");
  Require(format == 1, "'", path, "': only PCM WAV is supported (format tag ", format, ")");
  Require(channels == 1, "'", path, "': expected mono, got ", channels, " channels");
  Require(bits == 16, "'", path, "': expected 16-bit samples, got ", bits);
  Require(sample_rate > 0, "'", path, "': bad sample rate");

  Waveform wave;
  wave.sample_rate_hz = sample_rate;
  const std::size_t n = data_len / 2;
  wave.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int16_t s = static_cast<std::int16_t>(ReadU16Le(data + 2 * i));
    wave.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return wave;
}

void WriteWav(const std::string& path, const Waveform& wave) {
  Require(!wave.samples.empty(), "refusing to write empty waveform to '", path, "'");
  Require(wave.sample_rate_hz > 0, "bad sample rate writing '", path, "'");

  const std::uint32_t n = static_cast<std::uint32_t>(wave.samples.size());
  const std::uint32_t data_bytes = n * 2;
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  PutU32Le(out, 36 + data_bytes);
  out.append("WAVE");
  out.append("fmt ");
  PutU32Le(out, 16);
  PutU16Le(out, 1);  // PCM
  PutU16Le(out, 1);  // mono
  PutU32Le(out, static_cast<std::uint32_t>(wave.sample_rate_hz));
  PutU32Le(out, static_cast<std::uint32_t>(wave.sample_rate_hz) * 2);
  PutU16Le(out, 2);   // block align
  PutU16Le(out, 16);  // bits per sample
  out.append("data");
  PutU32Le(out, data_bytes);
  for (std::size_t i = 0; i < wave.samples.size(); ++i) {
    const double clamped = std::clamp(wave.samples[i], -1.0, 1.0);
    const long scaled = std::lround(clamped * 32767.0);
    PutU16Le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  AtomicWriteFile(path, out);
}

}  // namespace vectorscope
