// tests/augment_test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "testutil.hpp"
#include "vectorscope/augment.hpp"

using namespace vectorscope;

namespace {

Waveform Tone(double freq_hz, double duration_s, int rate, double amp) {
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(static_cast<std::size_t>(duration_s * rate));
  for (std::size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = amp * std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate);
  return w;
}

double Power(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("noise fitting tiles short noise and crops long noise") {
  Waveform noise;
  noise.sample_rate_hz = 8000;
  noise.samples = {0.1, 0.2, 0.3};

  const Waveform tiled = FitNoiseLength(noise, 7, nullptr);
  REQUIRE(tiled.samples.size() == 7);
  CHECK(tiled.samples[0] == 0.1);
  CHECK(tiled.samples[3] == 0.1);
  CHECK(tiled.samples[6] == 0.1);

  // Null rng means offset zero, so cropping keeps the prefix.
  const Waveform cropped = FitNoiseLength(noise, 2, nullptr);
  REQUIRE(cropped.samples.size() == 2);
  CHECK(cropped.samples[0] == 0.1);
  CHECK(cropped.samples[1] == 0.2);

  Rng rng(11);
  const Waveform random_crop = FitNoiseLength(noise, 2, &rng);
  CHECK(random_crop.samples.size() == 2);
}

// The gain is fit over speech-active samples, so a pure tone lands within a
// fraction of a percent of the whole-signal answer rather than exactly on it
// (the active region covers a non-integer number of periods).
TEST_CASE("equal-power mixing at 0 dB uses unit gain") {
  const Waveform speech = Tone(440.0, 0.5, 16000, 0.3);
  const Waveform noise = Tone(555.0, 0.5, 16000, 0.3);
  FrontendConfig sad;
  const MixResult r = MixAtSnrDetailed(speech, noise, 0.0, sad, nullptr);
  CHECK(r.gain == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("a four-to-one power ratio at 0 dB doubles the noise") {
  const Waveform speech = Tone(440.0, 0.5, 16000, 0.4);
  const Waveform noise = Tone(555.0, 0.5, 16000, 0.2);
  FrontendConfig sad;
  const MixResult r = MixAtSnrDetailed(speech, noise, 0.0, sad, nullptr);
  CHECK(r.gain == doctest::Approx(2.0).epsilon(2e-3));
}

TEST_CASE("the requested ratio is measurable in the output") {
  const Waveform speech = Tone(300.0, 0.6, 16000, 0.35);
  const Waveform noise = Tone(777.0, 0.8, 16000, 0.25);
  FrontendConfig sad;
  for (double snr_db : {-5.0, 0.0, 7.5, 15.0}) {
    const MixResult r = MixAtSnrDetailed(speech, noise, snr_db, sad, nullptr);
    REQUIRE(r.mixed.samples.size() == speech.samples.size());
    // Subtract the (rescaled) speech to recover the noise part; the tone is
    // loud everywhere so active-sample bookkeeping cannot hide a mismatch.
    std::vector<double> noise_part(r.mixed.samples.size());
    for (std::size_t i = 0; i < noise_part.size(); ++i)
      noise_part[i] = r.mixed.samples[i] / r.rescale - speech.samples[i];
    const double measured =
        10.0 * std::log10(Power(speech.samples) / Power(noise_part));
    CHECK(std::fabs(measured - snr_db) < 0.1);
  }
}

TEST_CASE("mixing protects the peak instead of clamping") {
  const Waveform speech = Tone(440.0, 0.3, 16000, 0.9);
  const Waveform noise = Tone(560.0, 0.3, 16000, 0.9);
  FrontendConfig sad;
  const MixResult r = MixAtSnrDetailed(speech, noise, 0.0, sad, nullptr);
  double peak = 0.0;
  for (double v : r.mixed.samples) peak = std::max(peak, std::fabs(v));
  CHECK(peak <= 1.0);
  CHECK(r.rescale < 1.0);
  CHECK(r.rescale > 0.0);
}

TEST_CASE("zero-power inputs are mixing errors") {
  Waveform silence;
  silence.sample_rate_hz = 16000;
  silence.samples.assign(8000, 0.0);
  const Waveform tone = Tone(440.0, 0.5, 16000, 0.3);
  FrontendConfig sad;
  CHECK_THROWS(MixAtSnrDetailed(silence, tone, 0.0, sad, nullptr));
  CHECK_THROWS(MixAtSnrDetailed(tone, silence, 0.0, sad, nullptr));
}

TEST_CASE("a unit impulse response is an identity under reverberation") {
  const Waveform speech = Tone(440.0, 0.25, 16000, 0.5);
  Waveform rir;
  rir.sample_rate_hz = 16000;
  rir.samples = {1.0};
  const Waveform out = Reverberate(speech, rir);
  REQUIRE(out.samples.size() == speech.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    CHECK(out.samples[i] == doctest::Approx(speech.samples[i]).epsilon(1e-12));
}

TEST_CASE("a shifted impulse delays the signal") {
  Waveform x;
  x.sample_rate_hz = 8000;
  x.samples = {0.5, 0.25, 0.125, 0.0, 0.0, 0.0};
  Waveform rir;
  rir.sample_rate_hz = 8000;
  rir.samples = {0.0, 1.0};
  const Waveform out = Reverberate(x, rir);
  REQUIRE(out.samples.size() == x.samples.size());
  // Renormalized to the input peak, the delayed copy keeps the shape.
  CHECK(out.samples[0] == doctest::Approx(0.0));
  CHECK(out.samples[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.samples[2] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("a two-tap response matches hand convolution up to the peak norm") {
  Waveform x;
  x.sample_rate_hz = 8000;
  x.samples = {1.0, 0.0, 0.0, 0.0};
  Waveform rir;
  rir.sample_rate_hz = 8000;
  rir.samples = {1.0, 0.5};
  const Waveform out = Reverberate(x, rir);
  REQUIRE(out.samples.size() == 4);
  // Raw convolution is {1, 0.5, 0, 0}; peak matches input peak already.
  CHECK(out.samples[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.samples[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.samples[2] == doctest::Approx(0.0));
}

TEST_CASE("reverberation input errors") {
  const Waveform speech = Tone(440.0, 0.1, 16000, 0.5);
  Waveform empty_rir;
  empty_rir.sample_rate_hz = 16000;
  CHECK_THROWS(Reverberate(speech, empty_rir));
  Waveform wrong_rate;
  wrong_rate.sample_rate_hz = 8000;
  wrong_rate.samples = {1.0};
  CHECK_THROWS(Reverberate(speech, wrong_rate));
}

TEST_CASE("speed perturbation scales duration by the factor") {
  const Waveform three_s = Tone(440.0, 3.0, 16000, 0.4);
  const Waveform fast = SpeedPerturb(three_s, 1.5);
  const double expect_fast = 3.0 / 1.5 * 16000.0;
  CHECK(std::fabs(static_cast<double>(fast.samples.size()) - expect_fast) <= 1.0);

  const Waveform slow = SpeedPerturb(three_s, 0.5);
  const double expect_slow = 3.0 / 0.5 * 16000.0;
  CHECK(std::fabs(static_cast<double>(slow.samples.size()) - expect_slow) <= 1.0);
}

TEST_CASE("factor one is bit-identical") {
  const Waveform x = Tone(333.0, 1.0, 16000, 0.4);
  const Waveform y = SpeedPerturb(x, 1.0);
  REQUIRE(y.samples.size() == x.samples.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i) CHECK(y.samples[i] == x.samples[i]);
}

TEST_CASE("a speed round trip restores the length within two samples") {
  const Waveform x = Tone(250.0, 1.0, 16000, 0.4);
  const Waveform there = SpeedPerturb(x, 1.5);
  const Waveform back = SpeedPerturb(there, 1.0 / 1.5);
  const double diff =
      std::fabs(static_cast<double>(back.samples.size()) - static_cast<double>(x.samples.size()));
  CHECK(diff <= 2.0);
}

TEST_CASE("additive augmentation expands four ways with suffixed ids") {
  testing::TempDir dir;
  testing::ToyCorpusSpec spec;
  spec.num_speakers = 2;
  spec.utts_per_speaker = 2;
  spec.min_duration_s = 0.4;
  spec.max_duration_s = 0.5;
  const Manifest clean = testing::MakeToyCorpus(dir.Path("corpus"), spec);

  // Noise sources: reuse corpus audio for babble, tones for music and noise.
  NoiseCatalog catalog;
  const Waveform music = Tone(523.0, 1.0, 16000, 0.3);
  const Waveform noise = Tone(111.0, 1.0, 16000, 0.3);
  WriteWav(dir.Path("music.wav"), music);
  WriteWav(dir.Path("noise.wav"), noise);
  for (const UtteranceRecord& r : clean.records)
    catalog.entries.push_back({r.audio_path, AugType::kBabble});
  catalog.entries.push_back({dir.Path("music.wav"), AugType::kMusic});
  catalog.entries.push_back({dir.Path("noise.wav"), AugType::kNoise});

  AugmentPolicy policy;
  policy.seed = 9;
  const Manifest out = AugmentManifest(clean, catalog, policy, dir.Path("aug"));
  CHECK(out.records.size() == 4 * clean.records.size());

  const std::string first = clean.records[0].utt_id;
  CHECK(out.Has(first));
  CHECK(out.Has(first + "-babble"));
  CHECK(out.Has(first + "-music"));
  CHECK(out.Has(first + "-noise"));
  CHECK(out.Get(first + "-music").aug_type == AugType::kMusic);
  CHECK(out.Get(first + "-music").parent_utt_id == first);
  CHECK(out.Get(first + "-music").transcript == clean.records[0].transcript);
  CHECK(out.Get(first).audio_path == clean.records[0].audio_path);

  // The new audio exists and differs from the original.
  const Waveform orig = ReadWav(clean.records[0].audio_path);
  const Waveform mixed = ReadWav(out.Get(first + "-noise").audio_path);
  CHECK(mixed.samples.size() == orig.samples.size());
  bool any_diff = false;
  for (std::size_t i = 0; i < orig.samples.size() && !any_diff; ++i)
    any_diff = std::fabs(mixed.samples[i] - orig.samples[i]) > 1e-6;
  CHECK(any_diff);
}

TEST_CASE("an empty category is an error naming the category") {
  testing::TempDir dir;
  testing::ToyCorpusSpec spec;
  spec.num_speakers = 2;
  spec.utts_per_speaker = 1;
  spec.min_duration_s = 0.3;
  spec.max_duration_s = 0.4;
  const Manifest clean = testing::MakeToyCorpus(dir.Path("corpus"), spec);

  NoiseCatalog catalog;  // no music entries at all
  for (const UtteranceRecord& r : clean.records)
    catalog.entries.push_back({r.audio_path, AugType::kBabble});

  AugmentPolicy policy;
  policy.categories = {AugType::kMusic};
  try {
    AugmentManifest(clean, catalog, policy, dir.Path("aug"));
    CHECK(false);
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("music") != std::string::npos);
  }
}

TEST_CASE("speed mode with factor one only passes records through") {
  testing::TempDir dir;
  testing::ToyCorpusSpec spec;
  spec.num_speakers = 2;
  spec.utts_per_speaker = 1;
  spec.min_duration_s = 0.3;
  spec.max_duration_s = 0.4;
  const Manifest clean = testing::MakeToyCorpus(dir.Path("corpus"), spec);

  NoiseCatalog catalog;
  AugmentPolicy policy;
  policy.mode = AugmentMode::kSpeed;
  policy.speed_factors = {1.0};
  const Manifest out = AugmentManifest(clean, catalog, policy, dir.Path("aug"));
  CHECK(out.records.size() == clean.records.size());
  for (const UtteranceRecord& r : out.records) CHECK(r.speed_factor == 1.0);
}

TEST_CASE("speed mode triples the manifest and rescales durations") {
  testing::TempDir dir;
  testing::ToyCorpusSpec spec;
  spec.num_speakers = 2;
  spec.utts_per_speaker = 1;
  spec.min_duration_s = 0.5;
  spec.max_duration_s = 0.6;
  const Manifest clean = testing::MakeToyCorpus(dir.Path("corpus"), spec);

  NoiseCatalog catalog;
  AugmentPolicy policy;
  policy.mode = AugmentMode::kSpeed;
  const Manifest out = AugmentManifest(clean, catalog, policy, dir.Path("aug"));
  CHECK(out.records.size() == 3 * clean.records.size());

  const UtteranceRecord& base = clean.records[0];
  const UtteranceRecord& fast = out.Get(base.utt_id + "-sp1.5");
  CHECK(fast.speed_factor == 1.5);
  const Waveform fast_wave = ReadWav(fast.audio_path);
  const Waveform base_wave = ReadWav(base.audio_path);
  const double expect = static_cast<double>(base_wave.samples.size()) / 1.5;
  CHECK(std::fabs(static_cast<double>(fast_wave.samples.size()) - expect) <= 1.0);
  CHECK(fast.duration_s ==
        doctest::Approx(static_cast<double>(fast_wave.samples.size()) / 16000.0));
}

TEST_CASE("catalog files parse categories") {
  testing::TempDir dir;
  const std::string path = dir.Path("catalog.tsv");
  {
    std::ofstream out(path);
    out << "# path\tcategory\n";
    out << "/a/b.wav\tbabble\n";
    out << "/c/d.wav\tmusic\n";
    out << "/e/f.wav\tnoise\n";
  }
  const NoiseCatalog catalog = LoadNoiseCatalog(path);
  REQUIRE(catalog.entries.size() == 3);
  CHECK(catalog.CategoryIndices(AugType::kBabble).size() == 1);
  CHECK(catalog.CategoryIndices(AugType::kMusic) == std::vector<std::size_t>{1});
}
