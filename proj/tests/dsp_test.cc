// tests/dsp_test.cc

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
#include <complex>

#include "testutil.hpp"
#include "vectorscope/common.hpp"
#include "vectorscope/dsp.hpp"

using namespace vectorscope;

namespace {

Waveform NoiseWave(std::size_t n, int rate, std::uint64_t seed) {
  Waveform w;
  w.sample_rate_hz = rate;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(0.3 * rng.Gaussian());
  return w;
}

}  // namespace

TEST_CASE("fft matches a direct dft and inverts itself") {
  Rng rng(11);
  std::vector<std::complex<double>> data(64);
  for (auto& x : data) x = {rng.Gaussian(), rng.Gaussian()};
  const std::vector<std::complex<double>> original = data;

  std::vector<std::complex<double>> direct(64);
  for (std::size_t k = 0; k < 64; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t t = 0; t < 64; ++t)
      acc += original[t] * std::polar(1.0, -2.0 * M_PI * double(k * t) / 64.0);
    direct[k] = acc;
  }
  ComplexFft(data, false);
  for (std::size_t k = 0; k < 64; ++k) CHECK(std::abs(data[k] - direct[k]) < 1e-9);
  ComplexFft(data, true);
  for (std::size_t k = 0; k < 64; ++k) CHECK(std::abs(data[k] - original[k]) < 1e-9);
}

TEST_CASE("frame count formula") {
  const Waveform w = NoiseWave(16000, 16000, 1);
  CHECK(FrameSignal(w, 0.025, 0.010).rows() == 98);

  const Waveform exact = NoiseWave(400, 16000, 2);
  CHECK(FrameSignal(exact, 0.025, 0.010).rows() == 1);

  const Waveform tooshort = NoiseWave(399, 16000, 3);
  CHECK_THROWS(FrameSignal(tooshort, 0.025, 0.010));
}

TEST_CASE("frame count formula holds across shapes") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 400 + static_cast<std::size_t>(rng.UniformInt(20000));
    const Waveform w = NoiseWave(n, 16000, 100 + trial);
    const Eigen::Index t = FrameSignal(w, 0.025, 0.010).rows();
    CHECK(t == static_cast<Eigen::Index>((n - 400) / 160 + 1));
  }
}

TEST_CASE("window taper is symmetric and interior-peaked") {
  Waveform w;
  w.sample_rate_hz = 16000;
  w.samples.assign(400, 1.0);
  const Eigen::MatrixXd frames = FrameSignal(w, 0.025, 0.010);
  REQUIRE(frames.rows() == 1);
  const Eigen::VectorXd row = frames.row(0);
  for (Eigen::Index i = 0; i < 200; ++i)
    CHECK(row[i] == doctest::Approx(row[399 - i]).epsilon(1e-12));
  CHECK(row.maxCoeff() > row[0]);
  CHECK(row.maxCoeff() > row[399]);
}

TEST_CASE("mel scale anchor near 1000") {
  CHECK(std::abs(MelFromHz(1000.0) - 1000.0) < 1.0);
  CHECK(HzFromMel(MelFromHz(440.0)) == doctest::Approx(440.0).epsilon(1e-10));
}

TEST_CASE("all-zero frames hit the log floor in every filter") {
  Eigen::MatrixXd frames = Eigen::MatrixXd::Zero(3, 400);
  const FeatureMatrix f = LogMelFbank(frames, 30, 16000);
  CHECK(f.values.rows() == 3);
  CHECK(f.values.cols() == 30);
  for (Eigen::Index i = 0; i < f.values.size(); ++i)
    CHECK(f.values.data()[i] == doctest::Approx(std::log(kLogEnergyFloor)).epsilon(1e-12));
}

TEST_CASE("doubling the amplitude lifts every log filterbank output by log 4") {
  const Waveform w = NoiseWave(4000, 16000, 5);
  Waveform loud = w;
  for (double& x : loud.samples) x *= 2.0;
  const FeatureMatrix a = LogMelFbank(FrameSignal(w, 0.025, 0.010), 30, 16000);
  const FeatureMatrix b = LogMelFbank(FrameSignal(loud, 0.025, 0.010), 30, 16000);
  for (Eigen::Index i = 0; i < a.values.size(); ++i)
    CHECK(b.values.data()[i] - a.values.data()[i] == doctest::Approx(std::log(4.0)).epsilon(1e-8));
}

TEST_CASE("time reversal of frames reverses feature rows") {
  const Waveform w = NoiseWave(4000, 16000, 6);
  const Eigen::MatrixXd frames = FrameSignal(w, 0.025, 0.010);
  const FeatureMatrix fwd = LogMelFbank(frames, 30, 16000);
  const FeatureMatrix rev = LogMelFbank(frames.colwise().reverse(), 30, 16000);
  CHECK((fwd.values - rev.values.colwise().reverse()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dct matrix is orthonormal and the square case inverts") {
  const Eigen::MatrixXd dct = DctMatrix(30, 30);
  CHECK((dct * dct.transpose() - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-10);

  Rng rng(8);
  Eigen::VectorXd v(30);
  for (int i = 0; i < 30; ++i) v[i] = rng.Gaussian();
  const Eigen::VectorXd back = dct.transpose() * (dct * v);
  CHECK((back - v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mfcc of a constant log-mel vector concentrates in coefficient zero") {
  const Eigen::MatrixXd dct = DctMatrix(30, 30);
  const Eigen::VectorXd c = dct * Eigen::VectorXd::Constant(30, 2.5);
  for (int i = 1; i < 30; ++i) CHECK(std::abs(c[i]) < 1e-12);
  CHECK(std::abs(c[0]) > 1.0);
}

TEST_CASE("mfcc round-trips log-mel when the transform is square") {
  const Waveform w = NoiseWave(4000, 16000, 9);
  const Eigen::MatrixXd frames = FrameSignal(w, 0.025, 0.010);
  const FeatureMatrix fbank = LogMelFbank(frames, 30, 16000);
  const FeatureMatrix ceps = Mfcc(frames, 30, 30, 16000);
  const Eigen::MatrixXd dct = DctMatrix(30, 30);
  const Eigen::MatrixXd back = ceps.values * dct;  // rows are coefficient vectors
  CHECK((back - fbank.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("more coefficients than filters is an error") {
  const Eigen::MatrixXd frames = Eigen::MatrixXd::Random(2, 400);
  CHECK_THROWS(Mfcc(frames, 30, 31, 16000));
}

TEST_CASE("cmn removes a constant exactly") {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Constant(50, 30, 3.25);
  CHECK(SlidingCmn(f).values.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("short utterances reduce to global mean subtraction") {
  FeatureMatrix f;
  Rng rng(10);
  f.values = Eigen::MatrixXd::Zero(120, 4);
  for (Eigen::Index i = 0; i < f.values.size(); ++i) f.values.data()[i] = rng.Gaussian();
  const FeatureMatrix out = SlidingCmn(f, 3.0);  // window 300 > 120 frames
  const Eigen::RowVectorXd mean = f.values.colwise().mean();
  CHECK((out.values - (f.values.rowwise() - mean)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(out.values.colwise().mean().cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("impulse response of cmn has zero mean over its own window") {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Zero(400, 1);
  f.values(200, 0) = 1.0;
  const FeatureMatrix out = SlidingCmn(f, 3.0);
  // Centered window of the impulse frame: frames 50..349.
  CHECK(std::abs(out.values.block(50, 0, 300, 1).mean()) < 1e-10);
  // Any full window keeps a small residual bounded by 1/window.
  for (int start = 0; start + 300 <= 400; start += 25)
    CHECK(std::abs(out.values.block(start, 0, 300, 1).mean()) <= 1.0 / 300.0 + 1e-12);
}

TEST_CASE("sad rejects digital silence and accepts a loud tone") {
  Waveform silent;
  silent.sample_rate_hz = 16000;
  silent.samples.assign(8000, 0.0);
  const FeatureMatrix f0 = LogMelFbank(FrameSignal(silent, 0.025, 0.010), 30, 16000);
  CHECK(EnergySad(f0).NumSpeech() == 0);

  Waveform tone;
  tone.sample_rate_hz = 16000;
  for (int i = 0; i < 8000; ++i)
    tone.samples.push_back(0.5 * std::sin(2.0 * M_PI * 300.0 * i / 16000.0));
  const FeatureMatrix f1 = LogMelFbank(FrameSignal(tone, 0.025, 0.010), 30, 16000);
  const SadMask mask = EnergySad(f1);
  CHECK(mask.NumSpeech() == mask.speech.size());
}

TEST_CASE("sad finds the loud half of a half-silent signal") {
  Waveform w;
  w.sample_rate_hz = 16000;
  for (int i = 0; i < 8000; ++i)
    w.samples.push_back(0.5 * std::sin(2.0 * M_PI * 300.0 * i / 16000.0));
  w.samples.resize(16000, 0.0);
  const FeatureMatrix f = LogMelFbank(FrameSignal(w, 0.025, 0.010), 30, 16000);
  const SadMask mask = EnergySad(f);
  // 8000 samples of speech = frames 0..47 fully inside; boundary frames may
  // fall either way.
  int wrong = 0;
  for (std::size_t t = 0; t < mask.speech.size(); ++t) {
    const bool expected = t < 48;
    if (t >= 46 && t <= 50) continue;  // boundary slack
    if (mask.speech[t] != expected) ++wrong;
  }
  CHECK(wrong == 0);
}

TEST_CASE("apply mask keeps rows in order and errors when empty") {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Random(98, 5);
  SadMask all_true;
  all_true.speech.assign(98, true);
  CHECK(ApplyMask(f, all_true).values == f.values);

  SadMask some;
  some.speech.assign(98, false);
  for (int i = 0; i < 40; ++i) some.speech[static_cast<std::size_t>(i * 2)] = true;
  const FeatureMatrix kept = ApplyMask(f, some);
  CHECK(kept.values.rows() == 40);
  CHECK(kept.values.row(1) == f.values.row(2));

  SadMask none;
  none.speech.assign(98, false);
  CHECK_THROWS(ApplyMask(f, none));
}

TEST_CASE("front-end pipeline emits 30-dim features for both kinds") {
  const Waveform w = testing::SyntheticUtterance(0, 0, 1.0, 16000, 12);
  FrontendConfig fbank;
  const FeatureMatrix a = ProcessUtterance(w, fbank);
  CHECK(a.values.cols() == 30);
  CHECK(a.values.rows() >= 1);
  CHECK(a.values.allFinite());

  FrontendConfig mfcc;
  mfcc.kind = FeatureKind::kMfcc;
  mfcc.num_ceps = 30;
  const FeatureMatrix b = ProcessUtterance(w, mfcc);
  CHECK(b.values.cols() == 30);
  CHECK(b.feature_kind == FeatureKind::kMfcc);
}

TEST_CASE("the packaged front-end equals the manually staged composition") {
  const Waveform w = testing::SyntheticUtterance(1, 0, 1.0, 16000, 13);
  FrontendConfig config;  // defaults keep both stages on
  const FeatureMatrix out = ProcessUtterance(w, config);

  // Stage by hand: features, activity mask from the raw features, mean
  // normalization over all frames, then row selection.
  const Eigen::MatrixXd frames = FrameSignal(w, config.frame_len_s, config.frame_shift_s);
  const FeatureMatrix raw = LogMelFbank(frames, config.num_filters, w.sample_rate_hz);
  const SadMask mask = EnergySad(raw, config.sad_offset);
  const FeatureMatrix manual = ApplyMask(SlidingCmn(raw, config.cmn_window_s), mask);

  REQUIRE(out.values.rows() == manual.values.rows());
  CHECK(out.values == manual.values);
}
