// core/include/vectorscope/dsp.hpp

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

#ifndef VECTORSCOPE_DSP_HPP_
#define VECTORSCOPE_DSP_HPP_

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "vectorscope/wav.hpp"

namespace vectorscope {

inline constexpr double kLogEnergyFloor = 1e-10;

// In-place radix-2 FFT; data.size() must be a power of two.  The inverse
// transform includes the 1/N factor.
void ComplexFft(std::vector<std::complex<double>>& data, bool inverse);
std::size_t NextPowerOfTwo(std::size_t n);

double MelFromHz(double hz);
double HzFromMel(double mel);

enum class FeatureKind { kFbank, kMfcc };

struct FeatureMatrix {
  Eigen::MatrixXd values;  // T x F
  double frame_shift_s = 0.010;
  double frame_len_s = 0.025;
  FeatureKind feature_kind = FeatureKind::kFbank;

  Eigen::Index NumFrames() const { return values.rows(); }
  Eigen::Index Dim() const { return values.cols(); }
};

struct SadMask {
  std::vector<bool> speech;

  std::size_t NumSpeech() const;
};

// Windowed frames, one per row: T = floor((n - len) / shift) + 1, each
// multiplied by a raised-cosine taper.  Errors if the waveform is shorter
// than one frame.
Eigen::MatrixXd FrameSignal(const Waveform& wave, double frame_len_s, double frame_shift_s);

// T x (nfft/2 + 1) power spectrum; nfft = next power of two >= frame length.
Eigen::MatrixXd PowerSpectrum(const Eigen::MatrixXd& frames);

// Triangular mel filters from 20 Hz to Nyquist, n_filters x (nfft/2 + 1).
Eigen::MatrixXd MelFilterbank(int n_filters, std::size_t nfft, int sample_rate_hz);

// Orthonormal DCT-II matrix, n_ceps x n_filters; its transpose inverts the
// square case.
Eigen::MatrixXd DctMatrix(int n_ceps, int n_filters);

FeatureMatrix LogMelFbank(const Eigen::MatrixXd& frames, int n_filters, int sample_rate_hz);
FeatureMatrix Mfcc(const Eigen::MatrixXd& frames, int n_filters, int n_ceps, int sample_rate_hz);

// Mean over a window of up to window_s / frame_shift_s frames subtracted
// from each frame.  The window is centered where possible and slides to
// stay inside the utterance near the edges, so short inputs reduce to
// global mean subtraction.
FeatureMatrix SlidingCmn(const FeatureMatrix& feats, double window_s = 3.0);

// Frame-level speech decision from the log-energy channel (filterbank sum,
// or c0 rescaled to the same units for MFCC): speech iff the energy exceeds
// both the utterance mean plus offset and an absolute silence floor, then a
// 5-frame median smoothing.  Run this on features before CMN.
SadMask EnergySad(const FeatureMatrix& feats, double offset = -1.0);

// Keeps rows where the mask is true; errors on an all-false mask.
FeatureMatrix ApplyMask(const FeatureMatrix& feats, const SadMask& mask);

struct FrontendConfig {
  FeatureKind kind = FeatureKind::kFbank;
  double frame_len_s = 0.025;
  double frame_shift_s = 0.010;
  int num_filters = 30;
  int num_ceps = 30;
  double cmn_window_s = 3.0;
  double sad_offset = -1.0;
  bool apply_cmn = true;
  bool apply_sad = true;
};

// Full front-end: frame, featurize, SAD on the raw features, CMN, then drop
// the non-speech rows.
FeatureMatrix ProcessUtterance(const Waveform& wave, const FrontendConfig& config);

}  // namespace vectorscope

#endif  // VECTORSCOPE_DSP_HPP_
