// core/src/augment.cc

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

#include "vectorscope/augment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace vectorscope {

std::vector<std::size_t> NoiseCatalog::CategoryIndices(AugType category) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].category == category) out.push_back(i);
  return out;
}

NoiseCatalog LoadNoiseCatalog(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), "cannot open noise catalog '", path, "'");
  NoiseCatalog catalog;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    Require(tab != std::string::npos, "'", path, "' line ", line_no,
            ": expected two tab-separated fields");
    NoiseCatalog::Entry entry;
    entry.path = line.substr(0, tab);
    entry.category = AugTypeFromName(line.substr(tab + 1));
    Require(entry.category != AugType::kClean, "'", path, "' line ", line_no,
            ": catalog category must be babble, music, or noise");
    catalog.entries.push_back(std::move(entry));
  }
  return catalog;
}

Waveform FitNoiseLength(const Waveform& noise, std::size_t num_samples, Rng* rng) {
  Require(!noise.samples.empty(), "noise waveform is empty");
  Waveform out;
  out.sample_rate_hz = noise.sample_rate_hz;
  out.samples.resize(num_samples);
  const std::size_t n = noise.NumSamples();
  if (n >= num_samples) {
    std::size_t offset = 0;
    if (n > num_samples && rng != nullptr)
      offset = static_cast<std::size_t>(
          rng->UniformInt(static_cast<std::int64_t>(n - num_samples + 1)));
    std::copy(noise.samples.begin() + offset, noise.samples.begin() + offset + num_samples,
              out.samples.begin());
  } else {
    for (std::size_t i = 0; i < num_samples; ++i) out.samples[i] = noise.samples[i % n];
  }
  return out;
}

std::vector<bool> SampleActivity(std::size_t num_samples, const SadMask& mask,
                                 double frame_shift_s, int sample_rate_hz) {
  Require(!mask.speech.empty(), "empty speech activity mask");
  const std::size_t shift =
      static_cast<std::size_t>(std::lround(frame_shift_s * sample_rate_hz));
  Require(shift > 0, "frame shift is zero samples");
  std::vector<bool> active(num_samples);
  const std::size_t last = mask.speech.size() - 1;
  for (std::size_t s = 0; s < num_samples; ++s)
    active[s] = mask.speech[std::min(s / shift, last)];
  return active;
}

namespace {

// Mean squared amplitude over the flagged samples.
double ActivePower(const std::vector<double>& samples, const std::vector<bool>& active) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!active[i]) continue;
    sum += samples[i] * samples[i];
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

std::vector<bool> SpeechActivity(const Waveform& speech, const FrontendConfig& cfg) {
  const std::size_t frame_len =
      static_cast<std::size_t>(std::lround(cfg.frame_len_s * speech.sample_rate_hz));
  if (speech.NumSamples() < frame_len)
    return std::vector<bool>(speech.NumSamples(), true);
  const Eigen::MatrixXd frames = FrameSignal(speech, cfg.frame_len_s, cfg.frame_shift_s);
  const FeatureMatrix feats =
      cfg.kind == FeatureKind::kFbank
          ? LogMelFbank(frames, cfg.num_filters, speech.sample_rate_hz)
          : Mfcc(frames, cfg.num_filters, cfg.num_ceps, speech.sample_rate_hz);
  const SadMask mask = EnergySad(feats, cfg.sad_offset);
  return SampleActivity(speech.NumSamples(), mask, cfg.frame_shift_s, speech.sample_rate_hz);
}

}  // namespace

MixResult MixAtSnrDetailed(const Waveform& speech, const Waveform& noise, double snr_db,
                           const FrontendConfig& sad_frontend, Rng* rng) {
  Require(speech.sample_rate_hz == noise.sample_rate_hz,
          "sample rate mismatch between speech and noise");
  Require(std::isfinite(snr_db), "SNR must be finite");
  Require(speech.NumSamples() > 0, "speech waveform is empty");
  const Waveform fitted = FitNoiseLength(noise, speech.NumSamples(), rng);
  const std::vector<bool> active = SpeechActivity(speech, sad_frontend);
  const double p_speech = ActivePower(speech.samples, active);
  const double p_noise = ActivePower(fitted.samples, active);
  Require(p_speech > 0.0, "speech has zero power over its speech-active region");
  Require(p_noise > 0.0, "noise has zero power over the speech-active region");

  MixResult result;
  result.gain = std::sqrt(p_speech / (p_noise * std::pow(10.0, snr_db / 10.0)));
  result.mixed.sample_rate_hz = speech.sample_rate_hz;
  result.mixed.samples.resize(speech.NumSamples());
  double peak = 0.0;
  for (std::size_t i = 0; i < speech.NumSamples(); ++i) {
    result.mixed.samples[i] = speech.samples[i] + result.gain * fitted.samples[i];
    peak = std::max(peak, std::abs(result.mixed.samples[i]));
  }
  result.rescale = peak > 1.0 ? 1.0 / peak : 1.0;
  if (result.rescale != 1.0)
    for (double& s : result.mixed.samples) s *= result.rescale;
  return result;
}

Waveform MixAtSnr(const Waveform& speech, const Waveform& noise, double snr_db, Rng* rng) {
  return MixAtSnrDetailed(speech, noise, snr_db, FrontendConfig{}, rng).mixed;
}

Waveform Reverberate(const Waveform& wave, const Waveform& rir) {
  Require(!rir.samples.empty(), "impulse response is empty");
  Require(wave.sample_rate_hz == rir.sample_rate_hz,
          "sample rate mismatch between signal and impulse response");
  const std::size_t n = wave.NumSamples();
  Waveform out;
  out.sample_rate_hz = wave.sample_rate_hz;
  out.samples.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    const std::size_t j_max = std::min(i + 1, rir.samples.size());
    for (std::size_t j = 0; j < j_max; ++j) acc += rir.samples[j] * wave.samples[i - j];
    out.samples[i] = acc;
  }
  double peak_in = 0.0, peak_out = 0.0;
  for (double s : wave.samples) peak_in = std::max(peak_in, std::abs(s));
  for (double s : out.samples) peak_out = std::max(peak_out, std::abs(s));
  if (peak_in > 0.0 && peak_out > 0.0) {
    const double scale = peak_in / peak_out;
    for (double& s : out.samples) s *= scale;
  }
  return out;
}

Waveform SpeedPerturb(const Waveform& wave, double factor) {
  Require(factor > 0.0 && std::isfinite(factor), "speed factor must be positive");
  if (factor == 1.0) return wave;
  const std::size_t n_in = wave.NumSamples();
  const std::size_t n_out =
      static_cast<std::size_t>(std::llround(static_cast<double>(n_in) / factor));
  Waveform out;
  out.sample_rate_hz = wave.sample_rate_hz;
  out.samples.assign(n_out, 0.0);
  const double cutoff = std::min(1.0, 1.0 / factor);
  constexpr int kHalf = 8;  // 16-tap windowed sinc
  for (std::size_t m = 0; m < n_out; ++m) {
    const double pos = static_cast<double>(m) * factor;
    const auto base = static_cast<std::int64_t>(std::floor(pos));
    double acc = 0.0, wsum = 0.0;
    for (std::int64_t i = base - kHalf + 1; i <= base + kHalf; ++i) {
      const double x = pos - static_cast<double>(i);
      const double u = M_PI * cutoff * x;
      const double sinc = std::abs(u) < 1e-12 ? 1.0 : std::sin(u) / u;
      const double window = 0.5 + 0.5 * std::cos(M_PI * x / kHalf);
      const double weight = cutoff * sinc * window;
      wsum += weight;
      if (i >= 0 && i < static_cast<std::int64_t>(n_in))
        acc += weight * wave.samples[static_cast<std::size_t>(i)];
    }
    out.samples[m] = wsum > 1e-8 ? acc / wsum : 0.0;
  }
  return out;
}

namespace {

std::string FormatFactor(double factor) {
  std::ostringstream os;
  os << factor;
  return os.str();
}

const SnrRange& RangeFor(const AugmentPolicy& policy, AugType category) {
  switch (category) {
    case AugType::kBabble:
      return policy.babble_snr;
    case AugType::kMusic:
      return policy.music_snr;
    case AugType::kNoise:
      return policy.noise_snr;
    default:
      Fail("no SNR range for category '", AugTypeName(category), "'");
  }
}

Manifest SpeedExpand(const Manifest& manifest, const AugmentPolicy& policy,
                     const std::string& out_dir) {
  std::vector<double> factors = policy.speed_factors;
  std::sort(factors.begin(), factors.end());
  factors.erase(std::unique(factors.begin(), factors.end()), factors.end());
  Require(!factors.empty(), "no speed factors configured");
  for (double f : factors) Require(f > 0.0, "speed factor must be positive, got ", f);

  std::vector<std::vector<UtteranceRecord>> produced(manifest.NumRecords());
  ParallelFor(manifest.NumRecords(), [&](std::size_t i) {
    const UtteranceRecord& rec = manifest.records[i];
    Waveform original;
    bool loaded = false;
    for (double factor : factors) {
      if (factor == 1.0) {
        produced[i].push_back(rec);
        continue;
      }
      if (!loaded) {
        original = ReadWav(rec.audio_path);
        loaded = true;
      }
      const std::string new_id = rec.utt_id + "-sp" + FormatFactor(factor);
      const Waveform warped = SpeedPerturb(original, factor);
      const std::string path =
          (std::filesystem::path(out_dir) / (new_id + ".wav")).string();
      WriteWav(path, warped);
      UtteranceRecord copy = rec;
      copy.utt_id = new_id;
      copy.speed_factor = factor;
      copy.parent_utt_id = rec.utt_id;
      copy.audio_path = path;
      copy.duration_s = warped.DurationSeconds();
      produced[i].push_back(std::move(copy));
    }
  });
  std::vector<UtteranceRecord> flat;
  for (auto& group : produced)
    for (auto& rec : group) flat.push_back(std::move(rec));
  return MakeManifest(std::move(flat));
}

}  // namespace

Manifest AugmentManifest(const Manifest& manifest, const NoiseCatalog& catalog,
                         const AugmentPolicy& policy, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  if (policy.mode == AugmentMode::kSpeed) return SpeedExpand(manifest, policy, out_dir);

  std::map<AugType, std::vector<std::size_t>> pools;
  for (AugType category : policy.categories) {
    Require(category != AugType::kClean, "clean is not an augmentation category");
    pools[category] = catalog.CategoryIndices(category);
    Require(!pools[category].empty(), "catalog has no entries for category '",
            AugTypeName(category), "'");
  }

  std::vector<std::vector<UtteranceRecord>> produced(manifest.NumRecords());
  ParallelFor(manifest.NumRecords(), [&](std::size_t i) {
    const UtteranceRecord& rec = manifest.records[i];
    produced[i].push_back(rec);
    if (rec.aug_type != AugType::kClean || policy.categories.empty()) return;
    const Waveform clean = ReadWav(rec.audio_path);
    for (AugType category : policy.categories) {
      const std::string new_id = rec.utt_id + "-" + AugTypeName(category);
      Rng rng(CombineSeed(policy.seed, new_id));
      const std::vector<std::size_t>& pool = pools.at(category);
      Waveform noise;
      if (category == AugType::kBabble) {
        Require(policy.babble_min >= 1 && policy.babble_max >= policy.babble_min,
                "bad babble talker range");
        const int talkers =
            policy.babble_min +
            static_cast<int>(rng.UniformInt(policy.babble_max - policy.babble_min + 1));
        noise.sample_rate_hz = clean.sample_rate_hz;
        noise.samples.assign(clean.NumSamples(), 0.0);
        for (int b = 0; b < talkers; ++b) {
          const std::size_t pick =
              pool[static_cast<std::size_t>(rng.UniformInt(pool.size()))];
          const Waveform talker = ReadWav(catalog.entries[pick].path);
          Require(talker.sample_rate_hz == clean.sample_rate_hz,
                  "sample rate mismatch for '", catalog.entries[pick].path, "'");
          const Waveform fitted = FitNoiseLength(talker, clean.NumSamples(), &rng);
          for (std::size_t s = 0; s < fitted.NumSamples(); ++s)
            noise.samples[s] += fitted.samples[s];
        }
      } else {
        const std::size_t pick =
            pool[static_cast<std::size_t>(rng.UniformInt(pool.size()))];
        noise = ReadWav(catalog.entries[pick].path);
      }
      const SnrRange& range = RangeFor(policy, category);
      const double snr_db = rng.Uniform(range.lo_db, range.hi_db);
      const MixResult mix =
          MixAtSnrDetailed(clean, noise, snr_db, policy.sad_frontend, &rng);
      const std::string path =
          (std::filesystem::path(out_dir) / (new_id + ".wav")).string();
      WriteWav(path, mix.mixed);
      UtteranceRecord copy = rec;
      copy.utt_id = new_id;
      copy.aug_type = category;
      copy.parent_utt_id = rec.utt_id;
      copy.audio_path = path;
      copy.duration_s = mix.mixed.DurationSeconds();
      produced[i].push_back(std::move(copy));
    }
  });
  std::vector<UtteranceRecord> flat;
  for (auto& group : produced)
    for (auto& rec : group) flat.push_back(std::move(rec));
  return MakeManifest(std::move(flat));
}

}  // namespace vectorscope
