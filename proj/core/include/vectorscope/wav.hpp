// core/include/vectorscope/wav.hpp

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

#ifndef VECTORSCOPE_WAV_HPP_
#define VECTORSCOPE_WAV_HPP_

#include <cstddef>
#include <string>
#include <vector>

namespace vectorscope {

/// Mono audio in [-1, 1].  Sample rate is fixed per pipeline run,
/// default 16 kHz.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  std::size_t NumSamples() const { return samples.size(); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
};

/// Reads a mono 16-bit PCM RIFF/WAVE file.  Rejects other encodings.
Waveform ReadWav(const std::string& path);

/// Writes mono 16-bit PCM; samples are clamped to [-1, 1].
/// The write is atomic (temp file + rename).
void WriteWav(const std::string& path, const Waveform& wave);

}  // namespace vectorscope

#endif  // VECTORSCOPE_WAV_HPP_
