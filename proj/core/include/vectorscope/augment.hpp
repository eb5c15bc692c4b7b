// core/include/vectorscope/augment.hpp

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

#ifndef VECTORSCOPE_AUGMENT_HPP_
#define VECTORSCOPE_AUGMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "vectorscope/common.hpp"
#include "vectorscope/corpus.hpp"
#include "vectorscope/dsp.hpp"
#include "vectorscope/wav.hpp"

namespace vectorscope {

// Interference recordings grouped by the augmentation they produce.  The
// babble category holds single-speaker speech; several of them are summed
// before mixing.
struct NoiseCatalog {
  struct Entry {
    std::string path;
    AugType category = AugType::kNoise;
  };
  std::vector<Entry> entries;

  std::vector<std::size_t> CategoryIndices(AugType category) const;
};

// Tab-separated (audio_path, category) pairs, one per line, '#' comments.
NoiseCatalog LoadNoiseCatalog(const std::string& path);

struct SnrRange {
  double lo_db = 0.0;
  double hi_db = 0.0;
};

enum class AugmentMode { kAdditive, kSpeed };

struct AugmentPolicy {
  AugmentMode mode = AugmentMode::kAdditive;
  std::vector<AugType> categories = {AugType::kBabble, AugType::kMusic, AugType::kNoise};
  SnrRange babble_snr = {13.0, 20.0};
  SnrRange music_snr = {5.0, 15.0};
  SnrRange noise_snr = {0.0, 15.0};
  int babble_min = 3;
  int babble_max = 7;
  std::vector<double> speed_factors = {0.5, 1.0, 1.5};
  std::uint64_t seed = 0;
  FrontendConfig sad_frontend;  // used only to find speech-active samples
};

// Noise cut or tiled to exactly num_samples: shorter noise repeats from the
// start, longer noise is cropped at a random offset drawn from rng.
Waveform FitNoiseLength(const Waveform& noise, std::size_t num_samples, Rng* rng);

// Per-sample speech activity expanded from a frame-level mask; samples past
// the last frame inherit its decision.
std::vector<bool> SampleActivity(std::size_t num_samples, const SadMask& mask,
                                 double frame_shift_s, int sample_rate_hz);

struct MixResult {
  Waveform mixed;
  double gain = 0.0;     // multiplier applied to the noise
  double rescale = 1.0;  // shared peak-protection factor, <= 1
};

// speech + g * noise with g chosen so the speech-to-noise power ratio over
// the speech-active samples equals snr_db; both parts share one rescale
// that keeps the peak within [-1, 1] so the ratio survives clamping.  The
// noise is length-fitted first (rng drives the crop offset).  Errors when
// either side has zero power over the active region.
MixResult MixAtSnrDetailed(const Waveform& speech, const Waveform& noise, double snr_db,
                           const FrontendConfig& sad_frontend, Rng* rng);
Waveform MixAtSnr(const Waveform& speech, const Waveform& noise, double snr_db, Rng* rng);

// Full convolution with the impulse response, truncated to the input length
// and renormalized to the input's peak amplitude.
Waveform Reverberate(const Waveform& wave, const Waveform& rir);

// Windowed-sinc resampling that plays the signal back factor times faster,
// so duration' = duration / factor.  Factor 1 returns the input unchanged.
Waveform SpeedPerturb(const Waveform& wave, double factor);

// Expands a manifest.  Additive mode: every clean record yields itself plus
// one copy per configured category; already-augmented records pass through.
// Speed mode: every record yields one copy per factor, factor 1 keeping the
// original untouched.  New audio is written under out_dir and new records
// carry aug_type / speed_factor / parent_utt_id.
Manifest AugmentManifest(const Manifest& manifest, const NoiseCatalog& catalog,
                         const AugmentPolicy& policy, const std::string& out_dir);

}  // namespace vectorscope

#endif  // VECTORSCOPE_AUGMENT_HPP_
