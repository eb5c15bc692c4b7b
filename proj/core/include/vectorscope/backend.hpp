// core/include/vectorscope/backend.hpp

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

#ifndef VECTORSCOPE_BACKEND_HPP_
#define VECTORSCOPE_BACKEND_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vectorscope/archive.hpp"
#include "vectorscope/corpus.hpp"

namespace vectorscope {

// Centering plus discriminant projection: Apply(v) = P (v - mean).
struct LdaTransform {
  Eigen::VectorXd mean;
  Eigen::MatrixXd projection;  // out_dim x in_dim

  Eigen::Index InDim() const { return projection.cols(); }
  Eigen::Index OutDim() const { return projection.rows(); }
};

// Projection width used when none is configured: 100 below 512-dim inputs,
// 200 from there up, never more than the rank bound min(in_dim, classes-1).
int DefaultLdaDim(int in_dim, int num_classes);

// Rows of `embeddings` are observations; labels are 0-based class ids.
// Directions maximize the between/within scatter ratio; each row's first
// component above 1e-12 in magnitude is made positive so results are
// reproducible across runs.
LdaTransform FitLda(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                    int out_dim);
Eigen::VectorXd ApplyLda(const LdaTransform& lda, const Eigen::VectorXd& v);

// v / ||v||; errors on the zero vector.
Eigen::VectorXd LengthNormalize(const Eigen::VectorXd& v);

// Two-covariance model x = mean + s + e with speaker offset s ~ N(0, between)
// and residual e ~ N(0, within).
struct PldaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd between;
  Eigen::MatrixXd within;

  Eigen::Index Dim() const { return mean.size(); }
};

struct PldaTrainResult {
  PldaModel model;
  // Exact marginal log-likelihood at the start of each iteration; EM makes
  // this non-decreasing.
  std::vector<double> log_likelihoods;
};

// Needs at least two speakers with two or more utterances each.
PldaTrainResult FitPlda(const Eigen::MatrixXd& embeddings, const std::vector<int>& speakers,
                        int iters);

// Log-likelihood ratio of same-speaker vs different-speaker hypotheses.
// The quadratic form is arranged so Score(a, b) == Score(b, a) bitwise and a
// zero between-class covariance gives exactly 0 for every pair.
class PldaScorer {
 public:
  explicit PldaScorer(const PldaModel& model);

  double Score(const Eigen::VectorXd& enroll, const Eigen::VectorXd& test) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd quad_;   // coefficient of each centered vector with itself
  Eigen::MatrixXd cross_;  // coefficient of the enroll/test cross term
  double offset_ = 0.0;
};

// Trial taxonomy crossing speaker match with phrase match.
enum class TrialType { kTargetCorrect, kTargetWrong, kImposterCorrect, kImposterWrong };

const std::vector<TrialType>& AllTrialTypes();
std::string TrialTypeName(TrialType type);
TrialType TrialTypeFromName(const std::string& name);

struct Trial {
  std::string enroll_utt_id;
  std::string test_utt_id;
  TrialType type = TrialType::kTargetCorrect;

  bool IsTarget() const { return type == TrialType::kTargetCorrect; }
};

struct TrialPolicy {
  std::vector<TrialType> types = {TrialType::kTargetCorrect, TrialType::kTargetWrong,
                                  TrialType::kImposterCorrect, TrialType::kImposterWrong};
  // Per-type cap on emitted trials; 0 means unlimited.  Capped types are
  // subsampled with a seeded shuffle and re-sorted.
  std::size_t max_per_type = 0;
  std::uint64_t seed = 0;
};

// All unordered utterance pairs (no self-pairs), typed by speaker and
// normalized-transcript equality.  Errors when a requested type has no
// possible pairs, naming the type.
std::vector<Trial> MakeTrials(const Manifest& manifest, const TrialPolicy& policy);

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

// Tab-separated (enroll_utt_id, test_utt_id, trial_type); the score file
// appends the llr as a fourth column.
void WriteTrialFile(const std::string& path, const std::vector<Trial>& trials);
std::vector<Trial> ReadTrialFile(const std::string& path);
void WriteScoreFile(const std::string& path, const std::vector<ScoredTrial>& scored);
std::vector<ScoredTrial> ReadScoreFile(const std::string& path);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // false accepts / nontargets
  double frr = 0.0;  // false rejects / targets
};

struct EerResult {
  double eer = 0.0;
  double threshold = 0.0;
  std::vector<RocPoint> points;  // one per swept candidate threshold
};

// Threshold sweep over all score midpoints (accept iff score >= threshold)
// with linear interpolation between the operating points bracketing
// FAR = FRR.  Needs at least one score on each side.
EerResult ComputeEer(const std::vector<double>& target_scores,
                     const std::vector<double>& nontarget_scores);

// One EER per non-target type present, each computed against the
// target_correct scores.
std::map<TrialType, EerResult> EerByType(const std::vector<ScoredTrial>& scored);

// Fixed pipeline: center, LDA, length-normalize, PLDA.
struct BackendModel {
  LdaTransform lda;
  PldaModel plda;
};

struct BackendTrainConfig {
  int lda_dim = 0;  // 0 selects DefaultLdaDim
  int plda_iters = 10;
};

struct BackendTrainResult {
  BackendModel model;
  std::vector<double> plda_log_likelihoods;
};

// Labels come from the manifest's speaker_id of each embedding's utt_id;
// embeddings without a manifest record are an error.
BackendTrainResult TrainBackend(const EmbeddingSet& embeddings, const Manifest& manifest,
                                const BackendTrainConfig& config);

// Center + LDA + length-normalize; the PLDA scorer consumes this space.
Eigen::VectorXd BackendProject(const BackendModel& model, const Eigen::VectorXd& v);

// Scores every trial with a parallel map; all trial utterances must be
// present in the embedding set.
std::vector<ScoredTrial> ScoreTrials(const BackendModel& model, const EmbeddingSet& embeddings,
                                     const std::vector<Trial>& trials);

void SaveBackend(const std::string& path, const BackendModel& model);
BackendModel LoadBackend(const std::string& path);

}  // namespace vectorscope

#endif  // VECTORSCOPE_BACKEND_HPP_
