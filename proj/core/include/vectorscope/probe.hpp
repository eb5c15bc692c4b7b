// core/include/vectorscope/probe.hpp

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

#ifndef VECTORSCOPE_PROBE_HPP_
#define VECTORSCOPE_PROBE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vectorscope/archive.hpp"
#include "vectorscope/corpus.hpp"

namespace vectorscope {

enum class ProbeObjective { kCrossEntropy, kSquaredError };

struct MlpConfig {
  int input_dim = 0;
  int hidden = 500;
  int output_dim = 0;
  ProbeObjective objective = ProbeObjective::kCrossEntropy;
  // Per-class loss weights; empty means uniform.  Normalized to mean 1 over
  // the classes that actually occur, so a common scale factor cannot change
  // the update sequence.
  std::vector<double> class_weights;
  double learning_rate = 0.001;
  int epochs = 100;
  // Stop when the training loss improves by less than plateau_rel
  // (relatively) over plateau_window epochs.
  int plateau_window = 10;
  double plateau_rel = 1e-5;
  std::uint64_t seed = 0;
};

// One hidden layer with ReLU; the output layer is linear (logits for
// cross-entropy, raw values for regression).
struct MlpModel {
  MlpConfig config;
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // output x hidden
  Eigen::VectorXd b2;
};

MlpModel InitMlp(const MlpConfig& config, std::uint64_t seed);

// Row-per-example inputs; `classes` feeds cross-entropy, `targets` feeds
// squared error (the other may be empty).
struct ProbeData {
  Eigen::MatrixXd inputs;
  std::vector<int> classes;
  Eigen::MatrixXd targets;
};

// Mean loss over the batch: weighted negative log-likelihood for
// cross-entropy, (1/N) sum of squared errors for regression.  When grad is
// non-null it receives dLoss/dparam in a model-shaped container.
double MlpLossAndGrad(const MlpModel& model, const ProbeData& data, MlpModel* grad);

Eigen::MatrixXd MlpForward(const MlpModel& model, const Eigen::MatrixXd& inputs);

// Full-batch Adam with the plateau stop; errors when a classification
// training set contains a single class.
MlpModel TrainProbe(const ProbeData& data, const MlpConfig& config);

// weight_c proportional to 1/count_c over the given labels, normalized to
// mean 1 across observed classes; unobserved classes get weight 0.
std::vector<double> InverseFrequencyWeights(const std::vector<int>& labels, int num_classes);

struct PerClassMetrics {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::size_t support = 0;  // true examples of the class in the test set
};

struct ClassificationReport {
  double accuracy = 0.0;
  Eigen::MatrixXi confusion;  // rows = truth, cols = prediction
  std::vector<PerClassMetrics> per_class;
};

// Argmax predictions with ties broken toward the lowest class index;
// precision from column sums, recall from row sums, F the harmonic mean
// (0 when both are 0).
ClassificationReport EvaluateClassification(const MlpModel& model, const Eigen::MatrixXd& inputs,
                                            const std::vector<int>& labels,
                                            const std::vector<std::string>& class_names);

// 1 - RMSE / population std of truth; 1 only for a perfect prediction, and
// unbounded below.  Errors on constant truth.
double OneMinusNrmse(const std::vector<double>& pred, const std::vector<double>& truth);

// Headline of the multi-bit tasks: mean over utterances of the fraction of
// active probes answered correctly.
double MeanFractionCorrect(const std::vector<std::size_t>& correct_per_utt,
                           std::size_t active_probes);

struct ProbeTaskSpec {
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  int hidden = 500;
  double learning_rate = 0.001;
  int epochs = 100;
  TaskAux aux;

  // Applies the per-task conventions: 0.2 test share for the speaking-rate
  // task, 0.1 for the rest.
  static ProbeTaskSpec ForTask(TaskId task);
};

struct TaskReport {
  TaskId task = TaskId::kSession;
  std::string headline_name;  // accuracy | mean_word_fraction | one_minus_nrmse
  double headline = 0.0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  // Classes for single-label tasks, one entry per word or consonant for the
  // multi-label tasks.
  std::vector<PerClassMetrics> per_class;
  Eigen::MatrixXi confusion;  // single-label tasks only
  std::vector<std::string> skipped;  // probes without both classes in training
};

// Trains and evaluates the probe(s) for one task.  Every manifest record
// must have an embedding.
TaskReport RunTask(TaskId task, const EmbeddingSet& embeddings, const Manifest& manifest,
                   const ProbeTaskSpec& spec);

// Human-readable table and a machine-readable JSON record.
void WriteTaskReportTsv(const std::string& path, const TaskReport& report);
void WriteTaskReportJson(const std::string& path, const TaskReport& report);

}  // namespace vectorscope

#endif  // VECTORSCOPE_PROBE_HPP_
