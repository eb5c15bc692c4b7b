// core/src/backend.cc

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

#include "vectorscope/backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "vectorscope/common.hpp"

namespace vectorscope {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Symmetrizes and, when the Cholesky fails, walks a ridge up until it
// succeeds.  Returns the (possibly ridged) matrix.
Eigen::MatrixXd EnsurePositiveDefinite(Eigen::MatrixXd m, const char* what) {
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  double ridge = std::max(1e-12, 1e-8 * m.trace() / static_cast<double>(m.rows()));
  int guard = 0;
  while (llt.info() != Eigen::Success) {
    Require(++guard <= 40, what, " stays singular after repeated ridging");
    Warn(what, " is degenerate, adding ridge ", ridge);
    m += ridge * Eigen::MatrixXd::Identity(m.rows(), m.cols());
    llt.compute(m);
    ridge *= 10.0;
  }
  return m;
}

struct InverseLogDet {
  Eigen::MatrixXd inverse;
  double log_det = 0.0;
};

InverseLogDet InvertSpd(const Eigen::MatrixXd& m, const char* what) {
  const Eigen::LLT<Eigen::MatrixXd> llt(m);
  Require(llt.info() == Eigen::Success, what, " is not positive-definite");
  InverseLogDet out;
  out.inverse = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    out.log_det += 2.0 * std::log(llt.matrixL()(i, i));
  return out;
}

}  // namespace

int DefaultLdaDim(int in_dim, int num_classes) {
  const int base = in_dim < 512 ? 100 : 200;
  return std::max(1, std::min({base, in_dim, num_classes - 1}));
}

LdaTransform FitLda(const Eigen::MatrixXd& embeddings, const std::vector<int>& labels,
                    int out_dim) {
  const Eigen::Index n = embeddings.rows();
  const Eigen::Index dim = embeddings.cols();
  Require(n >= 2 && dim >= 1, "LDA needs at least two observations");
  Require(static_cast<Eigen::Index>(labels.size()) == n,
          "label count ", labels.size(), " does not match ", n, " observations");

  std::map<int, std::vector<Eigen::Index>> classes;
  for (Eigen::Index i = 0; i < n; ++i) classes[labels[i]].push_back(i);
  const int num_classes = static_cast<int>(classes.size());
  Require(num_classes >= 2, "LDA needs at least two classes");
  const int max_dim = static_cast<int>(std::min<Eigen::Index>(dim, num_classes - 1));
  Require(out_dim >= 1 && out_dim <= max_dim, "LDA output dim ", out_dim,
          " is infeasible: at most ", max_dim, " with ", num_classes,
          " classes and ", dim, "-dim input");

  LdaTransform lda;
  lda.mean = embeddings.colwise().mean().transpose();
  Eigen::MatrixXd sw = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd sb = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& [label, rows] : classes) {
    Eigen::VectorXd class_mean = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i : rows) class_mean += embeddings.row(i).transpose();
    class_mean /= static_cast<double>(rows.size());
    for (Eigen::Index i : rows) {
      const Eigen::VectorXd d = embeddings.row(i).transpose() - class_mean;
      sw += d * d.transpose();
    }
    const Eigen::VectorXd offset = class_mean - lda.mean;
    sb += static_cast<double>(rows.size()) * offset * offset.transpose();
  }
  const double ridge = std::max(1e-12, 1e-8 * sw.trace() / static_cast<double>(dim));
  sw += ridge * Eigen::MatrixXd::Identity(dim, dim);

  const Eigen::LLT<Eigen::MatrixXd> llt(sw);
  Require(llt.info() == Eigen::Success, "within-class scatter not invertible after ridge");
  // Whiten the between-class scatter: M = L^-1 Sb L^-T is symmetric, and
  // eigenvectors u map back through v = L^-T u.
  const Eigen::MatrixXd half = llt.matrixL().solve(sb);
  Eigen::MatrixXd m = llt.matrixL().solve(half.transpose());
  m = 0.5 * (m + m.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  Require(es.info() == Eigen::Success, "LDA eigendecomposition failed");

  lda.projection.resize(out_dim, dim);
  for (int r = 0; r < out_dim; ++r) {
    const Eigen::VectorXd u = es.eigenvectors().col(dim - 1 - r);
    Eigen::VectorXd v = llt.matrixL().transpose().solve(u);
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (std::abs(v[i]) > 1e-12) {
        if (v[i] < 0.0) v = -v;
        break;
      }
    }
    lda.projection.row(r) = v.transpose();
  }
  return lda;
}

Eigen::VectorXd ApplyLda(const LdaTransform& lda, const Eigen::VectorXd& v) {
  Require(v.size() == lda.InDim(), "vector dim ", v.size(), " does not match LDA input dim ",
          lda.InDim());
  return lda.projection * (v - lda.mean);
}

Eigen::VectorXd LengthNormalize(const Eigen::VectorXd& v) {
  const double norm = v.norm();
  Require(norm > 0.0, "cannot length-normalize the zero vector");
  return v / norm;
}

namespace {

struct SpeakerStats {
  double count = 0.0;
  Eigen::VectorXd mean;     // of centered embeddings
  Eigen::MatrixXd scatter;  // around the speaker mean
};

double SpeakerLogLikelihood(const Eigen::MatrixXd& within, double within_log_det,
                            const Eigen::MatrixXd& within_inv, const Eigen::MatrixXd& between,
                            const SpeakerStats& s) {
  // Rotating each speaker's block so the first axis is the scaled mean
  // splits the marginal into one N(0, W + nB) draw and n-1 N(0, W) draws.
  const double n = s.count;
  const Eigen::Index dim = s.mean.size();
  const Eigen::MatrixXd pooled = within + n * between;
  const Eigen::LLT<Eigen::MatrixXd> llt(pooled);
  Require(llt.info() == Eigen::Success, "W + nB is not positive-definite");
  double pooled_log_det = 0.0;
  for (Eigen::Index i = 0; i < dim; ++i)
    pooled_log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const double mean_term = n * s.mean.dot(llt.solve(s.mean));
  const double scatter_term = (within_inv * s.scatter).trace();
  return -0.5 * (pooled_log_det + mean_term + (n - 1.0) * within_log_det + scatter_term +
                 n * static_cast<double>(dim) * kLog2Pi);
}

}  // namespace

PldaTrainResult FitPlda(const Eigen::MatrixXd& embeddings, const std::vector<int>& speakers,
                        int iters) {
  const Eigen::Index n = embeddings.rows();
  const Eigen::Index dim = embeddings.cols();
  Require(static_cast<Eigen::Index>(speakers.size()) == n,
          "speaker count ", speakers.size(), " does not match ", n, " observations");
  Require(iters >= 1, "PLDA needs at least one iteration");

  std::map<int, std::vector<Eigen::Index>> groups;
  for (Eigen::Index i = 0; i < n; ++i) groups[speakers[i]].push_back(i);
  int multi = 0;
  for (const auto& [spk, rows] : groups)
    if (rows.size() >= 2) ++multi;
  Require(groups.size() >= 2 && multi >= 2,
          "PLDA training needs at least two speakers with two or more utterances each");

  PldaTrainResult result;
  PldaModel& model = result.model;
  model.mean = embeddings.colwise().mean().transpose();
  const Eigen::MatrixXd centered = embeddings.rowwise() - model.mean.transpose();

  std::vector<SpeakerStats> stats;
  stats.reserve(groups.size());
  for (const auto& [spk, rows] : groups) {
    SpeakerStats s;
    s.count = static_cast<double>(rows.size());
    s.mean = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index i : rows) s.mean += centered.row(i).transpose();
    s.mean /= s.count;
    s.scatter = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i : rows) {
      const Eigen::VectorXd d = centered.row(i).transpose() - s.mean;
      s.scatter += d * d.transpose();
    }
    stats.push_back(std::move(s));
  }
  const double num_speakers = static_cast<double>(stats.size());

  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd between = Eigen::MatrixXd::Zero(dim, dim);
  for (const SpeakerStats& s : stats) {
    within += s.scatter;
    between += s.mean * s.mean.transpose();
  }
  within /= static_cast<double>(n);
  between /= num_speakers;
  model.within = EnsurePositiveDefinite(within, "PLDA within-class scatter");
  model.between = EnsurePositiveDefinite(between, "PLDA between-class scatter");

  for (int iter = 0; iter < iters; ++iter) {
    const InverseLogDet w = InvertSpd(model.within, "PLDA within covariance");
    const InverseLogDet b = InvertSpd(model.between, "PLDA between covariance");

    double loglike = 0.0;
    for (const SpeakerStats& s : stats)
      loglike += SpeakerLogLikelihood(model.within, w.log_det, w.inverse, model.between, s);
    result.log_likelihoods.push_back(loglike);

    Eigen::MatrixXd acc_between = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd acc_within = Eigen::MatrixXd::Zero(dim, dim);
    for (const SpeakerStats& s : stats) {
      const Eigen::MatrixXd precision = b.inverse + s.count * w.inverse;
      const Eigen::LLT<Eigen::MatrixXd> llt(precision);
      Require(llt.info() == Eigen::Success, "PLDA posterior precision not PD");
      const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(dim, dim));
      const Eigen::VectorXd post_mean = llt.solve(w.inverse * (s.count * s.mean));
      acc_between += cov + post_mean * post_mean.transpose();
      const Eigen::VectorXd resid = s.mean - post_mean;
      acc_within += s.scatter + s.count * (cov + resid * resid.transpose());
    }
    model.between = EnsurePositiveDefinite(acc_between / num_speakers,
                                           "PLDA between-class update");
    model.within = EnsurePositiveDefinite(acc_within / static_cast<double>(n),
                                          "PLDA within-class update");
  }
  return result;
}

PldaScorer::PldaScorer(const PldaModel& model) : mean_(model.mean) {
  Require(model.mean.size() == model.between.rows() &&
              model.between.rows() == model.within.rows(),
          "inconsistent PLDA model dimensions");
  const Eigen::MatrixXd sigma_tot = model.between + model.within;
  const Eigen::MatrixXd w2b = model.within + 2.0 * model.between;
  const InverseLogDet tot = InvertSpd(sigma_tot, "total covariance");
  const InverseLogDet same = InvertSpd(w2b, "within + 2x between covariance");
  const InverseLogDet diff = InvertSpd(model.within, "within covariance");
  // In the rotated pair basis u = (x+y)/sqrt(2), v = (x-y)/sqrt(2) the
  // same-speaker covariance is block-diagonal with W + 2B and W, so the llr
  // collapses to two quadratic forms plus a cross term.
  quad_ = 0.5 * tot.inverse - 0.25 * (same.inverse + diff.inverse);
  cross_ = 0.5 * (diff.inverse - same.inverse);
  offset_ = tot.log_det - 0.5 * same.log_det - 0.5 * diff.log_det;
}

double PldaScorer::Score(const Eigen::VectorXd& enroll, const Eigen::VectorXd& test) const {
  Require(enroll.size() == mean_.size() && test.size() == mean_.size(),
          "trial vector dim does not match PLDA dim ", mean_.size());
  const Eigen::VectorXd a = enroll - mean_;
  const Eigen::VectorXd b = test - mean_;
  // Both halves of the cross term are evaluated so the score is symmetric
  // down to the last bit.
  const double cross = 0.5 * (a.dot(cross_ * b) + b.dot(cross_ * a));
  const double score = a.dot(quad_ * a) + b.dot(quad_ * b) + cross + offset_;
  Require(std::isfinite(score), "PLDA score is not finite");
  return score;
}

const std::vector<TrialType>& AllTrialTypes() {
  static const std::vector<TrialType> kTypes = {
      TrialType::kTargetCorrect, TrialType::kTargetWrong, TrialType::kImposterCorrect,
      TrialType::kImposterWrong};
  return kTypes;
}

std::string TrialTypeName(TrialType type) {
  switch (type) {
    case TrialType::kTargetCorrect:
      return "target_correct";
    case TrialType::kTargetWrong:
      return "target_wrong";
    case TrialType::kImposterCorrect:
      return "imposter_correct";
    case TrialType::kImposterWrong:
      return "imposter_wrong";
  }
  Fail("bad TrialType value");
}

TrialType TrialTypeFromName(const std::string& name) {
  for (TrialType type : AllTrialTypes())
    if (TrialTypeName(type) == name) return type;
  Fail("unknown trial type '", name, "'");
}

std::vector<Trial> MakeTrials(const Manifest& manifest, const TrialPolicy& policy) {
  Require(manifest.NumRecords() >= 2, "trial generation needs at least two utterances");
  Require(!policy.types.empty(), "no trial types requested");
  const std::size_t n = manifest.NumRecords();
  std::vector<std::string> phrase(n);
  for (std::size_t i = 0; i < n; ++i) {
    phrase[i] = NormalizeTranscript(manifest.records[i].transcript);
    Require(!phrase[i].empty(), "utterance '", manifest.records[i].utt_id,
            "' has an empty transcript; trials need phrases");
  }

  std::map<TrialType, std::vector<Trial>> buckets;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same_speaker =
          manifest.records[i].speaker_id == manifest.records[j].speaker_id;
      const bool same_phrase = phrase[i] == phrase[j];
      TrialType type;
      if (same_speaker)
        type = same_phrase ? TrialType::kTargetCorrect : TrialType::kTargetWrong;
      else
        type = same_phrase ? TrialType::kImposterCorrect : TrialType::kImposterWrong;
      buckets[type].push_back(
          Trial{manifest.records[i].utt_id, manifest.records[j].utt_id, type});
    }
  }

  std::vector<Trial> result;
  for (TrialType type : AllTrialTypes()) {
    if (std::find(policy.types.begin(), policy.types.end(), type) == policy.types.end())
      continue;
    auto it = buckets.find(type);
    Require(it != buckets.end() && !it->second.empty(), "no possible trials of type '",
            TrialTypeName(type), "'");
    std::vector<Trial>& bucket = it->second;
    if (policy.max_per_type > 0 && bucket.size() > policy.max_per_type) {
      Rng rng(CombineSeed(policy.seed, "trials:" + TrialTypeName(type)));
      for (std::size_t i = bucket.size(); i > 1; --i)
        std::swap(bucket[i - 1], bucket[rng.UniformInt(static_cast<std::int64_t>(i))]);
      bucket.resize(policy.max_per_type);
      std::sort(bucket.begin(), bucket.end(), [](const Trial& a, const Trial& b) {
        return std::tie(a.enroll_utt_id, a.test_utt_id) <
               std::tie(b.enroll_utt_id, b.test_utt_id);
      });
    }
    result.insert(result.end(), bucket.begin(), bucket.end());
  }
  return result;
}

void WriteTrialFile(const std::string& path, const std::vector<Trial>& trials) {
  std::ostringstream os;
  os << "# enroll_utt_id\ttest_utt_id\ttrial_type\n";
  for (const Trial& t : trials)
    os << t.enroll_utt_id << '\t' << t.test_utt_id << '\t' << TrialTypeName(t.type) << '\n';
  AtomicWriteFile(path, os.str());
}

namespace {

std::vector<std::vector<std::string>> ReadTabTable(const std::string& path,
                                                   std::size_t num_fields) {
  std::ifstream in(path);
  Require(in.good(), "cannot open '", path, "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    Require(fields.size() == num_fields, "'", path, "' line ", line_no, ": expected ",
            num_fields, " tab-separated fields, got ", fields.size());
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<Trial> ReadTrialFile(const std::string& path) {
  std::vector<Trial> trials;
  for (const auto& row : ReadTabTable(path, 3))
    trials.push_back(Trial{row[0], row[1], TrialTypeFromName(row[2])});
  return trials;
}

void WriteScoreFile(const std::string& path, const std::vector<ScoredTrial>& scored) {
  std::ostringstream os;
  os << "# enroll_utt_id\ttest_utt_id\ttrial_type\tllr\n";
  char buf[64];
  for (const ScoredTrial& s : scored) {
    std::snprintf(buf, sizeof buf, "%.17g", s.score);
    os << s.trial.enroll_utt_id << '\t' << s.trial.test_utt_id << '\t'
       << TrialTypeName(s.trial.type) << '\t' << buf << '\n';
  }
  AtomicWriteFile(path, os.str());
}

std::vector<ScoredTrial> ReadScoreFile(const std::string& path) {
  std::vector<ScoredTrial> scored;
  for (const auto& row : ReadTabTable(path, 4)) {
    ScoredTrial s;
    s.trial = Trial{row[0], row[1], TrialTypeFromName(row[2])};
    try {
      std::size_t used = 0;
      s.score = std::stod(row[3], &used);
      Require(used == row[3].size(), "trailing characters");
    } catch (const std::exception&) {
      Fail("'", path, "': bad llr value '", row[3], "'");
    }
    scored.push_back(std::move(s));
  }
  return scored;
}

EerResult ComputeEer(const std::vector<double>& target_scores,
                     const std::vector<double>& nontarget_scores) {
  Require(!target_scores.empty() && !nontarget_scores.empty(),
          "EER needs at least one target and one non-target score");
  for (double s : target_scores) Require(std::isfinite(s), "non-finite target score");
  for (double s : nontarget_scores) Require(std::isfinite(s), "non-finite non-target score");

  std::vector<double> tgt = target_scores;
  std::vector<double> non = nontarget_scores;
  std::sort(tgt.begin(), tgt.end());
  std::sort(non.begin(), non.end());

  std::vector<double> all;
  all.reserve(tgt.size() + non.size());
  all.insert(all.end(), tgt.begin(), tgt.end());
  all.insert(all.end(), non.begin(), non.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  // A trial is accepted iff score >= threshold; candidates bracket every
  // distinct decision boundary.
  std::vector<double> thresholds;
  thresholds.push_back(all.front() - 1.0);
  for (std::size_t i = 0; i + 1 < all.size(); ++i)
    thresholds.push_back(0.5 * (all[i] + all[i + 1]));
  thresholds.push_back(all.back() + 1.0);

  EerResult result;
  result.points.reserve(thresholds.size());
  const double n_tgt = static_cast<double>(tgt.size());
  const double n_non = static_cast<double>(non.size());
  for (double theta : thresholds) {
    const auto accepts =
        static_cast<double>(non.end() - std::lower_bound(non.begin(), non.end(), theta));
    const auto rejects =
        static_cast<double>(std::lower_bound(tgt.begin(), tgt.end(), theta) - tgt.begin());
    result.points.push_back(RocPoint{theta, accepts / n_non, rejects / n_tgt});
  }

  // FAR - FRR walks from +1 down to -1; interpolate across the sign change.
  for (std::size_t k = 0; k + 1 < result.points.size(); ++k) {
    const double d0 = result.points[k].far - result.points[k].frr;
    const double d1 = result.points[k + 1].far - result.points[k + 1].frr;
    if (d1 > 0.0) continue;
    const double t = d0 / (d0 - d1);
    result.eer = result.points[k].frr + t * (result.points[k + 1].frr - result.points[k].frr);
    result.threshold = result.points[k].threshold +
                       t * (result.points[k + 1].threshold - result.points[k].threshold);
    return result;
  }
  Fail("EER sweep found no crossing");
}

std::map<TrialType, EerResult> EerByType(const std::vector<ScoredTrial>& scored) {
  std::map<TrialType, std::vector<double>> by_type;
  for (const ScoredTrial& s : scored) by_type[s.trial.type].push_back(s.score);
  const auto targets = by_type.find(TrialType::kTargetCorrect);
  Require(targets != by_type.end(), "score set has no target_correct trials");
  std::map<TrialType, EerResult> result;
  for (const auto& [type, scores] : by_type) {
    if (type == TrialType::kTargetCorrect) continue;
    result[type] = ComputeEer(targets->second, scores);
  }
  Require(!result.empty(), "score set has no non-target trials");
  return result;
}

BackendTrainResult TrainBackend(const EmbeddingSet& embeddings, const Manifest& manifest,
                                const BackendTrainConfig& config) {
  Require(!embeddings.vectors.empty(), "no embeddings to train on");
  std::map<std::string, int> speaker_ids;
  for (const auto& [utt, vec] : embeddings.vectors) {
    Require(manifest.Has(utt), "embedding '", utt, "' has no manifest record");
    speaker_ids.emplace(manifest.Get(utt).speaker_id, 0);
  }
  int next = 0;
  for (auto& [spk, id] : speaker_ids) id = next++;

  const Eigen::Index n = static_cast<Eigen::Index>(embeddings.vectors.size());
  Eigen::MatrixXd x(n, embeddings.dim);
  std::vector<int> labels(n);
  Eigen::Index row = 0;
  for (const auto& [utt, vec] : embeddings.vectors) {
    x.row(row) = vec.transpose();
    labels[row] = speaker_ids.at(manifest.Get(utt).speaker_id);
    ++row;
  }

  const int lda_dim = config.lda_dim > 0
                          ? config.lda_dim
                          : DefaultLdaDim(static_cast<int>(embeddings.dim),
                                          static_cast<int>(speaker_ids.size()));
  BackendTrainResult result;
  result.model.lda = FitLda(x, labels, lda_dim);

  Eigen::MatrixXd projected(n, lda_dim);
  for (Eigen::Index i = 0; i < n; ++i)
    projected.row(i) =
        LengthNormalize(ApplyLda(result.model.lda, x.row(i).transpose())).transpose();
  PldaTrainResult plda = FitPlda(projected, labels, config.plda_iters);
  result.model.plda = std::move(plda.model);
  result.plda_log_likelihoods = std::move(plda.log_likelihoods);
  return result;
}

Eigen::VectorXd BackendProject(const BackendModel& model, const Eigen::VectorXd& v) {
  return LengthNormalize(ApplyLda(model.lda, v));
}

std::vector<ScoredTrial> ScoreTrials(const BackendModel& model, const EmbeddingSet& embeddings,
                                     const std::vector<Trial>& trials) {
  const PldaScorer scorer(model.plda);
  std::map<std::string, Eigen::VectorXd> projected;
  for (const Trial& t : trials) {
    for (const std::string& utt : {t.enroll_utt_id, t.test_utt_id}) {
      if (projected.count(utt)) continue;
      const auto it = embeddings.vectors.find(utt);
      Require(it != embeddings.vectors.end(), "trial utterance '", utt,
              "' has no embedding");
      projected.emplace(utt, BackendProject(model, it->second));
    }
  }
  std::vector<ScoredTrial> scored(trials.size());
  ParallelFor(trials.size(), [&](std::size_t i) {
    scored[i].trial = trials[i];
    scored[i].score =
        scorer.Score(projected.at(trials[i].enroll_utt_id), projected.at(trials[i].test_utt_id));
  });
  return scored;
}

static const char kBackendMagic[] = "VSBK1";

void SaveBackend(const std::string& path, const BackendModel& model) {
  BinaryWriter w;
  w.PutMagic(kBackendMagic);
  w.PutU32(static_cast<std::uint32_t>(model.lda.InDim()));
  w.PutU32(static_cast<std::uint32_t>(model.lda.OutDim()));
  w.PutVectorF64(model.lda.mean);
  w.PutMatrixF64(model.lda.projection);
  w.PutVectorF64(model.plda.mean);
  w.PutMatrixF64(model.plda.between);
  w.PutMatrixF64(model.plda.within);
  w.WriteTo(path);
}

BackendModel LoadBackend(const std::string& path) {
  BinaryReader r = BinaryReader::FromFile(path);
  r.ExpectMagic(kBackendMagic);
  const Eigen::Index in_dim = static_cast<Eigen::Index>(r.GetU32());
  const Eigen::Index out_dim = static_cast<Eigen::Index>(r.GetU32());
  Require(in_dim >= 1 && out_dim >= 1 && out_dim <= in_dim, "'", path, "': bad header");
  BackendModel model;
  model.lda.mean = r.GetVectorF64(in_dim);
  model.lda.projection = r.GetMatrixF64(out_dim, in_dim);
  model.plda.mean = r.GetVectorF64(out_dim);
  model.plda.between = r.GetMatrixF64(out_dim, out_dim);
  model.plda.within = r.GetMatrixF64(out_dim, out_dim);
  Require(r.AtEnd(), "'", path, "': trailing bytes after model payload");
  return model;
}

}  // namespace vectorscope
