// core/include/vectorscope/xvector.hpp

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

#ifndef VECTORSCOPE_XVECTOR_HPP_
#define VECTORSCOPE_XVECTOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vectorscope/common.hpp"

namespace vectorscope {

struct FrameLayerSpec {
  std::vector<int> offsets;  // temporal splice offsets, sorted
  int out_dim = 0;
};

// TDNN over spliced frame contexts with statistics pooling; the embedding
// is the first segment-level affine output before its nonlinearity.
struct TdnnConfig {
  int feature_dim = 30;
  std::vector<FrameLayerSpec> frame_layers;
  int embedding_dim = 512;  // first segment layer output
  int segment7_dim = 512;
  int num_speakers = 0;

  // Frame dims 512,512,512,512,1500 with contexts [-2..2], {-2,0,2},
  // {-3,0,3}, {0}, {0}; 15-frame receptive field.
  static TdnnConfig Default(int embedding_dim, int num_speakers);
  // Same contexts with frame dims 48,48,48,48,96 and a 48-wide second
  // segment layer, for tests and small corpora.
  static TdnnConfig Desk(int embedding_dim, int num_speakers);

  int StatsDim() const { return 2 * frame_layers.back().out_dim; }
  int ReceptiveField() const;
  void Validate() const;
};

struct TdnnModel {
  TdnnConfig config;
  // frame layers, then segment6, segment7, output; frame weights are
  // out_dim x (in_dim * |offsets|).
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

TdnnModel InitTdnn(const TdnnConfig& config, std::uint64_t seed);

// Per-dimension mean and standard deviation over rows; std uses the
// population formula with a 1e-9 guard inside the square root.  The
// accumulation is order-independent, so any row permutation of the input
// produces bit-identical output.
Eigen::VectorXd StatsPool(const Eigen::MatrixXd& activations);
Eigen::MatrixXd StatsPoolBackward(const Eigen::MatrixXd& activations,
                                  const Eigen::VectorXd& grad_out);

struct TdnnOutput {
  Eigen::VectorXd logits;     // num_speakers
  Eigen::VectorXd embedding;  // segment6 pre-activation
};

// Needs at least ReceptiveField() frames; no padding is applied.
TdnnOutput TdnnForward(const TdnnModel& model, const Eigen::MatrixXd& features);

struct TdnnGradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

TdnnGradients ZeroGradients(const TdnnModel& model);

struct TdnnExample {
  const Eigen::MatrixXd* features = nullptr;
  int speaker = 0;
};

// Mean cross-entropy over the batch plus gradients for every parameter.
double TdnnLossAndGrad(const TdnnModel& model, const std::vector<TdnnExample>& batch,
                       TdnnGradients* grads);

struct TdnnTrainConfig {
  int chunk_min = 200;  // frames, 2 s at a 10 ms shift
  int chunk_max = 400;
  int batch_size = 16;
  int epochs = 3;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  bool verbose = false;
};

struct Chunk {
  Eigen::Index start = 0;
  Eigen::Index len = 0;
};

// Uniform length in [min_len, min(max_len, num_frames)], uniform start.
Chunk SampleChunk(Eigen::Index num_frames, int min_len, int max_len, Rng& rng);

struct TdnnTrainResult {
  TdnnModel model;
  std::vector<double> step_losses;
};

// Adam over random-chunk batches; utterances shorter than chunk_min are
// dropped with a warning.  Deterministic given the seed.
TdnnTrainResult TrainTdnn(const TdnnModel& init, const std::vector<TdnnExample>& data,
                          const TdnnTrainConfig& config);

Eigen::VectorXd ExtractXvector(const TdnnModel& model, const Eigen::MatrixXd& features);

// Whole-utterance argmax accuracy against the example speaker labels.
double TdnnAccuracy(const TdnnModel& model, const std::vector<TdnnExample>& data);

void SaveTdnn(const std::string& path, const TdnnModel& model);
TdnnModel LoadTdnn(const std::string& path);

}  // namespace vectorscope

#endif  // VECTORSCOPE_XVECTOR_HPP_
