// core/src/dsp.cc

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

#include "vectorscope/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "vectorscope/common.hpp"

namespace vectorscope {

std::size_t NextPowerOfTwo(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void ComplexFft(std::vector<std::complex<double>>& data, bool inverse) {
  const std::size_t n = data.size();
  Require(n > 0 && (n & (n - 1)) == 0, "FFT size must be a power of two, got ", n);
  // Bit-reversal permutation.
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = data[i + k];
        const std::complex<double> v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& x : data) x *= scale;
  }
}

double MelFromHz(double hz) {
  return 2595.0 * std::log10(1.0 + hz / 700.0);
}

double HzFromMel(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::size_t SadMask::NumSpeech() const {
  return static_cast<std::size_t>(std::count(speech.begin(), speech.end(), true));
}

Eigen::MatrixXd FrameSignal(const Waveform& wave, double frame_len_s, double frame_shift_s) {
  Require(wave.sample_rate_hz > 0, "bad sample rate");
  const std::size_t len = static_cast<std::size_t>(std::lround(frame_len_s * wave.sample_rate_hz));
  const std::size_t shift =
      static_cast<std::size_t>(std::lround(frame_shift_s * wave.sample_rate_hz));
  Require(len > 1 && shift > 0, "bad frame geometry: len ", len, ", shift ", shift);
  const std::size_t n = wave.NumSamples();
  Require(n >= len, "waveform of ", n, " samples is shorter than one frame (", len, ")");
  const std::size_t num_frames = (n - len) / shift + 1;

  Eigen::VectorXd window(len);
  for (std::size_t i = 0; i < len; ++i)
    window[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                     static_cast<double>(len - 1));

  Eigen::MatrixXd frames(num_frames, len);
  for (std::size_t t = 0; t < num_frames; ++t)
    for (std::size_t i = 0; i < len; ++i)
      frames(t, i) = wave.samples[t * shift + i] * window[i];
  return frames;
}

Eigen::MatrixXd PowerSpectrum(const Eigen::MatrixXd& frames) {
  Require(frames.rows() >= 1 && frames.cols() >= 2, "need at least one frame");
  const std::size_t nfft = NextPowerOfTwo(static_cast<std::size_t>(frames.cols()));
  const std::size_t bins = nfft / 2 + 1;
  Eigen::MatrixXd power(frames.rows(), bins);
  std::vector<std::complex<double>> buf(nfft);
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (Eigen::Index i = 0; i < frames.cols(); ++i) buf[i] = frames(t, i);
    ComplexFft(buf, false);
    for (std::size_t b = 0; b < bins; ++b) power(t, b) = std::norm(buf[b]);
  }
  return power;
}

Eigen::MatrixXd MelFilterbank(int n_filters, std::size_t nfft, int sample_rate_hz) {
  Require(n_filters >= 1, "need at least one mel filter");
  const double low_hz = 20.0;
  const double high_hz = sample_rate_hz / 2.0;
  Require(high_hz > low_hz, "sample rate too low for the mel range");
  const double low_mel = MelFromHz(low_hz);
  const double high_mel = MelFromHz(high_hz);
  const std::size_t bins = nfft / 2 + 1;

  std::vector<double> centers(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i)
    centers[i] = low_mel + (high_mel - low_mel) * i / static_cast<double>(n_filters + 1);

  Eigen::MatrixXd bank = Eigen::MatrixXd::Zero(n_filters, bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double hz = static_cast<double>(b) * sample_rate_hz / static_cast<double>(nfft);
    const double mel = MelFromHz(hz);
    for (int j = 0; j < n_filters; ++j) {
      const double left = centers[j], center = centers[j + 1], right = centers[j + 2];
      if (mel <= left || mel >= right) continue;
      bank(j, b) = mel <= center ? (mel - left) / (center - left)
                                 : (right - mel) / (right - center);
    }
  }
  return bank;
}

Eigen::MatrixXd DctMatrix(int n_ceps, int n_filters) {
  Require(n_ceps >= 1 && n_ceps <= n_filters, "need 1 <= n_ceps (", n_ceps, ") <= n_filters (",
          n_filters, ")");
  Eigen::MatrixXd dct(n_ceps, n_filters);
  const double norm0 = std::sqrt(1.0 / n_filters);
  const double norm = std::sqrt(2.0 / n_filters);
  for (int k = 0; k < n_ceps; ++k)
    for (int j = 0; j < n_filters; ++j)
      dct(k, j) = (k == 0 ? norm0 : norm) *
                  std::cos(M_PI * k * (j + 0.5) / static_cast<double>(n_filters));
  return dct;
}

FeatureMatrix LogMelFbank(const Eigen::MatrixXd& frames, int n_filters, int sample_rate_hz) {
  const Eigen::MatrixXd power = PowerSpectrum(frames);
  const std::size_t nfft = NextPowerOfTwo(static_cast<std::size_t>(frames.cols()));
  const Eigen::MatrixXd bank = MelFilterbank(n_filters, nfft, sample_rate_hz);
  FeatureMatrix out;
  out.feature_kind = FeatureKind::kFbank;
  out.values = (power * bank.transpose())
                   .cwiseMax(kLogEnergyFloor)
                   .array()
                   .log()
                   .matrix();
  return out;
}

FeatureMatrix Mfcc(const Eigen::MatrixXd& frames, int n_filters, int n_ceps,
                   int sample_rate_hz) {
  const FeatureMatrix fbank = LogMelFbank(frames, n_filters, sample_rate_hz);
  FeatureMatrix out;
  out.feature_kind = FeatureKind::kMfcc;
  out.values = fbank.values * DctMatrix(n_ceps, n_filters).transpose();
  return out;
}

FeatureMatrix SlidingCmn(const FeatureMatrix& feats, double window_s) {
  const Eigen::Index num_frames = feats.NumFrames();
  Require(num_frames >= 1, "SlidingCmn: empty features");
  Eigen::Index window = static_cast<Eigen::Index>(std::lround(window_s / feats.frame_shift_s));
  Require(window >= 1, "SlidingCmn: window shorter than one frame");
  if (window > num_frames) window = num_frames;

  // Prefix sums give each window mean in O(1).
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(num_frames + 1, feats.Dim());
  for (Eigen::Index t = 0; t < num_frames; ++t)
    prefix.row(t + 1) = prefix.row(t) + feats.values.row(t);

  FeatureMatrix out = feats;
  const Eigen::Index half = window / 2;
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    Eigen::Index start = t - half;
    start = std::min(start, num_frames - window);
    start = std::max<Eigen::Index>(start, 0);
    const Eigen::Index end = start + window;
    out.values.row(t) -=
        (prefix.row(end) - prefix.row(start)) / static_cast<double>(window);
  }
  return out;
}

SadMask EnergySad(const FeatureMatrix& feats, double offset) {
  const Eigen::Index num_frames = feats.NumFrames();
  Require(num_frames >= 1, "EnergySad: empty features");
  // Log-energy channel in filterbank-sum units for both front-ends; the
  // orthonormal DCT puts the same sum in c0 / sqrt(F).
  Eigen::VectorXd energy(num_frames);
  if (feats.feature_kind == FeatureKind::kFbank) {
    energy = feats.values.rowwise().sum();
  } else {
    energy = feats.values.col(0) * std::sqrt(static_cast<double>(feats.Dim()));
  }
  const double mean = energy.mean();
  // Frames at the log floor everywhere are silence regardless of the
  // relative rule, so a digitally silent file yields an all-false mask.
  const double silence_floor =
      static_cast<double>(feats.Dim()) * std::log(kLogEnergyFloor) + 0.5;

  std::vector<bool> raw(num_frames);
  for (Eigen::Index t = 0; t < num_frames; ++t)
    raw[t] = energy[t] > mean + offset && energy[t] > silence_floor;

  SadMask mask;
  mask.speech.resize(num_frames);
  for (Eigen::Index t = 0; t < num_frames; ++t) {
    int votes = 0, total = 0;
    for (Eigen::Index k = t - 2; k <= t + 2; ++k) {
      if (k < 0 || k >= num_frames) continue;
      ++total;
      if (raw[k]) ++votes;
    }
    mask.speech[t] = 2 * votes > total;
  }
  return mask;
}

FeatureMatrix ApplyMask(const FeatureMatrix& feats, const SadMask& mask) {
  Require(static_cast<std::size_t>(feats.NumFrames()) == mask.speech.size(),
          "mask length ", mask.speech.size(), " does not match ", feats.NumFrames(), " frames");
  const std::size_t kept = mask.NumSpeech();
  Require(kept > 0, "speech activity mask removed every frame");
  FeatureMatrix out = feats;
  out.values.resize(kept, feats.Dim());
  Eigen::Index row = 0;
  for (Eigen::Index t = 0; t < feats.NumFrames(); ++t)
    if (mask.speech[t]) out.values.row(row++) = feats.values.row(t);
  return out;
}

FeatureMatrix ProcessUtterance(const Waveform& wave, const FrontendConfig& config) {
  const Eigen::MatrixXd frames = FrameSignal(wave, config.frame_len_s, config.frame_shift_s);
  FeatureMatrix raw = config.kind == FeatureKind::kFbank
                          ? LogMelFbank(frames, config.num_filters, wave.sample_rate_hz)
                          : Mfcc(frames, config.num_filters, config.num_ceps,
                                 wave.sample_rate_hz);
  raw.frame_len_s = config.frame_len_s;
  raw.frame_shift_s = config.frame_shift_s;

  SadMask mask;
  if (config.apply_sad) mask = EnergySad(raw, config.sad_offset);
  FeatureMatrix feats = config.apply_cmn ? SlidingCmn(raw, config.cmn_window_s) : raw;
  if (config.apply_sad) feats = ApplyMask(feats, mask);
  return feats;
}

}  // namespace vectorscope
