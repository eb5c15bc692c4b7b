// core/src/probe.cc

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

#include "vectorscope/probe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vectorscope/common.hpp"
#include "vectorscope/optimizer.hpp"

namespace vectorscope {

MlpModel InitMlp(const MlpConfig& config, std::uint64_t seed) {
  Require(config.input_dim >= 1 && config.hidden >= 1 && config.output_dim >= 1,
          "bad MLP dimensions");
  MlpModel model;
  model.config = config;
  Rng rng(CombineSeed(seed, "probe-init"));
  model.w1 = GlorotUniform(config.hidden, config.input_dim, config.input_dim, config.hidden,
                           rng);
  model.b1 = Eigen::VectorXd::Zero(config.hidden);
  model.w2 = GlorotUniform(config.output_dim, config.hidden, config.hidden, config.output_dim,
                           rng);
  model.b2 = Eigen::VectorXd::Zero(config.output_dim);
  return model;
}

Eigen::MatrixXd MlpForward(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  Require(inputs.cols() == model.w1.cols(), "input dim ", inputs.cols(),
          " does not match probe input dim ", model.w1.cols());
  Eigen::MatrixXd hidden = inputs * model.w1.transpose();
  hidden.rowwise() += model.b1.transpose();
  hidden = hidden.cwiseMax(0.0);
  Eigen::MatrixXd out = hidden * model.w2.transpose();
  out.rowwise() += model.b2.transpose();
  return out;
}

namespace {

// Mean-1 normalization over the classes that occur; a shared scale factor
// therefore cannot change the training trajectory.
std::vector<double> NormalizeWeights(const std::vector<double>& weights) {
  double sum = 0.0;
  int active = 0;
  for (double w : weights) {
    Require(w >= 0.0, "class weights must be nonnegative");
    if (w > 0.0) {
      sum += w;
      ++active;
    }
  }
  Require(active > 0, "all class weights are zero");
  std::vector<double> out = weights;
  const double scale = static_cast<double>(active) / sum;
  for (double& w : out) w *= scale;
  return out;
}

}  // namespace

double MlpLossAndGrad(const MlpModel& model, const ProbeData& data, MlpModel* grad) {
  const Eigen::Index n = data.inputs.rows();
  Require(n >= 1, "empty probe batch");
  const Eigen::Index out_dim = model.w2.rows();

  // Forward pass with the pre-activation kept for the ReLU mask.
  Eigen::MatrixXd pre = data.inputs * model.w1.transpose();
  pre.rowwise() += model.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  Eigen::MatrixXd logits = hidden * model.w2.transpose();
  logits.rowwise() += model.b2.transpose();

  double loss = 0.0;
  Eigen::MatrixXd dlogits(n, out_dim);
  if (model.config.objective == ProbeObjective::kCrossEntropy) {
    Require(static_cast<Eigen::Index>(data.classes.size()) == n,
            "class labels do not match batch size");
    std::vector<double> weights(out_dim, 1.0);
    if (!model.config.class_weights.empty()) {
      Require(static_cast<Eigen::Index>(model.config.class_weights.size()) == out_dim,
              "need one class weight per output");
      weights = NormalizeWeights(model.config.class_weights);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const int label = data.classes[i];
      Require(label >= 0 && label < out_dim, "class label ", label, " out of range");
      const double w = weights[label];
      const double max = logits.row(i).maxCoeff();
      const double lse = max + std::log((logits.row(i).array() - max).exp().sum());
      loss += w * (lse - logits(i, label));
      dlogits.row(i) = (w / static_cast<double>(n)) *
                       (logits.row(i).array() - lse).exp().matrix();
      dlogits(i, label) -= w / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);
  } else {
    Require(data.targets.rows() == n && data.targets.cols() == out_dim,
            "regression targets do not match batch shape");
    const Eigen::MatrixXd err = logits - data.targets;
    loss = err.squaredNorm() / static_cast<double>(n);
    dlogits = (2.0 / static_cast<double>(n)) * err;
  }

  if (grad != nullptr) {
    grad->config = model.config;
    grad->w2 = dlogits.transpose() * hidden;
    grad->b2 = dlogits.colwise().sum().transpose();
    Eigen::MatrixXd dhidden = dlogits * model.w2;
    dhidden.array() *= (pre.array() > 0.0).cast<double>();
    grad->w1 = dhidden.transpose() * data.inputs;
    grad->b1 = dhidden.colwise().sum().transpose();
  }
  Require(std::isfinite(loss), "probe loss is not finite");
  return loss;
}

MlpModel TrainProbe(const ProbeData& data, const MlpConfig& config) {
  const Eigen::Index n = data.inputs.rows();
  Require(n >= 2, "probe training needs at least two examples");
  if (config.objective == ProbeObjective::kCrossEntropy) {
    const std::set<int> distinct(data.classes.begin(), data.classes.end());
    Require(distinct.size() >= 2, "probe training set contains a single class");
  }

  // Optimize on z-scored inputs so the step size does not depend on the
  // embedding scale.  The affine map is folded back into the first layer
  // below, so the returned model consumes raw embeddings.
  const Eigen::RowVectorXd mu = data.inputs.colwise().mean();
  Eigen::RowVectorXd sd =
      (data.inputs.rowwise() - mu).array().square().colwise().mean().sqrt();
  for (Eigen::Index d = 0; d < sd.size(); ++d)
    if (sd(d) < 1e-12) sd(d) = 1.0;
  ProbeData scaled = data;
  scaled.inputs = (data.inputs.rowwise() - mu).array().rowwise() / sd.array();

  MlpModel model = InitMlp(config, config.seed);

  std::vector<Eigen::MatrixXd> weights = {model.w1, model.w2};
  std::vector<Eigen::VectorXd> biases = {model.b1, model.b2};
  Eigen::VectorXd flat = FlattenTensors(weights, biases);
  AdamOptimizer adam(flat.size(), config.learning_rate);

  std::vector<double> history;
  history.reserve(config.epochs);
  MlpModel grad = model;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double loss = MlpLossAndGrad(model, scaled, &grad);
    history.push_back(loss);
    if (epoch >= config.plateau_window) {
      const double before = history[epoch - config.plateau_window];
      if (before - loss < config.plateau_rel * std::max(1e-12, std::abs(before))) break;
    }
    std::vector<Eigen::MatrixXd> gw = {grad.w1, grad.w2};
    std::vector<Eigen::VectorXd> gb = {grad.b1, grad.b2};
    const Eigen::VectorXd gflat = FlattenTensors(gw, gb);
    adam.Step(gflat, &flat);
    weights = {model.w1, model.w2};
    biases = {model.b1, model.b2};
    UnflattenTensors(flat, &weights, &biases);
    model.w1 = weights[0];
    model.w2 = weights[1];
    model.b1 = biases[0];
    model.b2 = biases[1];
  }

  model.w1 = model.w1.array().rowwise() / sd.array();
  model.b1 -= model.w1 * mu.transpose();
  return model;
}

std::vector<double> InverseFrequencyWeights(const std::vector<int>& labels, int num_classes) {
  Require(num_classes >= 1, "need at least one class");
  std::vector<double> counts(num_classes, 0.0);
  for (int label : labels) {
    Require(label >= 0 && label < num_classes, "label ", label, " out of range");
    counts[label] += 1.0;
  }
  std::vector<double> weights(num_classes, 0.0);
  for (int c = 0; c < num_classes; ++c)
    if (counts[c] > 0.0) weights[c] = 1.0 / counts[c];
  return NormalizeWeights(weights);
}

ClassificationReport EvaluateClassification(const MlpModel& model, const Eigen::MatrixXd& inputs,
                                            const std::vector<int>& labels,
                                            const std::vector<std::string>& class_names) {
  const Eigen::Index n = inputs.rows();
  Require(static_cast<Eigen::Index>(labels.size()) == n, "labels do not match inputs");
  Require(n >= 1, "empty evaluation set");
  const int num_classes = static_cast<int>(class_names.size());
  Require(num_classes == model.w2.rows(), "class names do not match model outputs");

  const Eigen::MatrixXd logits = MlpForward(model, inputs);
  ClassificationReport report;
  report.confusion = Eigen::MatrixXi::Zero(num_classes, num_classes);
  for (Eigen::Index i = 0; i < n; ++i) {
    int arg = 0;
    for (int c = 1; c < num_classes; ++c)
      if (logits(i, c) > logits(i, arg)) arg = c;  // ties keep the lowest index
    Require(labels[i] >= 0 && labels[i] < num_classes, "label out of range");
    report.confusion(labels[i], arg) += 1;
  }
  report.accuracy =
      static_cast<double>(report.confusion.trace()) / static_cast<double>(n);

  for (int c = 0; c < num_classes; ++c) {
    PerClassMetrics m;
    m.name = class_names[c];
    const double tp = report.confusion(c, c);
    const double col = report.confusion.col(c).sum();
    const double row = report.confusion.row(c).sum();
    m.precision = col > 0 ? tp / col : 0.0;
    m.recall = row > 0 ? tp / row : 0.0;
    m.f_score = (m.precision + m.recall) > 0.0
                    ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                    : 0.0;
    m.support = static_cast<std::size_t>(row);
    report.per_class.push_back(std::move(m));
  }
  return report;
}

double OneMinusNrmse(const std::vector<double>& pred, const std::vector<double>& truth) {
  Require(pred.size() == truth.size(), "prediction and truth lengths differ");
  const std::size_t n = truth.size();
  Require(n >= 2, "need at least two values");
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(n);
  double var = 0.0, mse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    var += (truth[i] - mean) * (truth[i] - mean);
    mse += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  }
  var /= static_cast<double>(n);
  mse /= static_cast<double>(n);
  Require(var > 0.0, "truth values are constant; relative error is undefined");
  return 1.0 - std::sqrt(mse) / std::sqrt(var);
}

double MeanFractionCorrect(const std::vector<std::size_t>& correct_per_utt,
                           std::size_t active_probes) {
  Require(!correct_per_utt.empty(), "no utterances");
  Require(active_probes > 0, "no active probes");
  double sum = 0.0;
  for (std::size_t correct : correct_per_utt) {
    Require(correct <= active_probes, "more correct answers than probes");
    sum += static_cast<double>(correct) / static_cast<double>(active_probes);
  }
  return sum / static_cast<double>(correct_per_utt.size());
}

ProbeTaskSpec ProbeTaskSpec::ForTask(TaskId task) {
  ProbeTaskSpec spec;
  spec.test_fraction = task == TaskId::kSpeed ? 0.2 : 0.1;
  return spec;
}

namespace {

struct SplitData {
  Eigen::MatrixXd train_x, test_x;
  std::vector<std::string> train_utts, test_utts;
};

Eigen::MatrixXd GatherRows(const EmbeddingSet& embeddings,
                           const std::vector<std::string>& utts) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(utts.size()), embeddings.dim);
  for (std::size_t i = 0; i < utts.size(); ++i)
    x.row(static_cast<Eigen::Index>(i)) = embeddings.vectors.at(utts[i]).transpose();
  return x;
}

// Labeled utterances of a manifest half, in record order.
std::vector<std::string> LabeledUtts(const Manifest& half, const LabelSet& labels) {
  std::vector<std::string> utts;
  for (const UtteranceRecord& rec : half.records) {
    const bool labeled = labels.regression ? labels.real_labels.count(rec.utt_id) != 0
                         : labels.multi_label
                             ? labels.bit_labels.count(rec.utt_id) != 0
                             : labels.class_labels.count(rec.utt_id) != 0;
    if (labeled) utts.push_back(rec.utt_id);
  }
  return utts;
}

TaskReport SingleLabelTask(TaskId task, const EmbeddingSet& embeddings,
                           const Manifest& manifest, const LabelSet& labels,
                           const ProbeTaskSpec& spec) {
  const SplitResult split =
      StratifiedSplit(manifest, spec.test_fraction, StratifyKey::kLabel, &labels, spec.seed);
  const std::vector<std::string> train_utts = LabeledUtts(split.train, labels);
  const std::vector<std::string> test_utts = LabeledUtts(split.test, labels);
  Require(!train_utts.empty() && !test_utts.empty(), "empty split for task ", TaskName(task));

  ProbeData data;
  data.inputs = GatherRows(embeddings, train_utts);
  for (const std::string& utt : train_utts) data.classes.push_back(labels.class_labels.at(utt));

  MlpConfig config;
  config.input_dim = static_cast<int>(embeddings.dim);
  config.hidden = spec.hidden;
  config.output_dim = static_cast<int>(labels.class_inventory.size());
  config.learning_rate = spec.learning_rate;
  config.epochs = spec.epochs;
  config.seed = CombineSeed(spec.seed, "probe:" + TaskName(task));
  if (task == TaskId::kGender)
    config.class_weights = InverseFrequencyWeights(data.classes, config.output_dim);

  const MlpModel model = TrainProbe(data, config);
  std::vector<int> test_labels;
  for (const std::string& utt : test_utts) test_labels.push_back(labels.class_labels.at(utt));
  const ClassificationReport eval = EvaluateClassification(
      model, GatherRows(embeddings, test_utts), test_labels, labels.class_inventory);

  TaskReport report;
  report.task = task;
  report.headline_name = "accuracy";
  report.headline = eval.accuracy;
  report.train_size = train_utts.size();
  report.test_size = test_utts.size();
  report.per_class = eval.per_class;
  report.confusion = eval.confusion;
  return report;
}

TaskReport MultiLabelTask(TaskId task, const EmbeddingSet& embeddings,
                          const Manifest& manifest, const LabelSet& labels,
                          const ProbeTaskSpec& spec) {
  const SplitResult split =
      StratifiedSplit(manifest, spec.test_fraction, StratifyKey::kSpeaker, nullptr, spec.seed);
  const std::vector<std::string> train_utts = LabeledUtts(split.train, labels);
  const std::vector<std::string> test_utts = LabeledUtts(split.test, labels);
  Require(!train_utts.empty() && !test_utts.empty(), "empty split for task ", TaskName(task));

  const Eigen::MatrixXd train_x = GatherRows(embeddings, train_utts);
  const Eigen::MatrixXd test_x = GatherRows(embeddings, test_utts);
  const std::size_t num_bits = labels.class_inventory.size();
  static const std::vector<std::string> kBinaryNames = {"absent", "present"};

  struct BitOutcome {
    bool skipped = false;
    PerClassMetrics metrics;                // for the positive class
    std::vector<int> correct;               // per test utterance, 0/1
  };
  std::vector<BitOutcome> outcomes(num_bits);

  ParallelFor(num_bits, [&](std::size_t bit) {
    ProbeData data;
    data.inputs = train_x;
    for (const std::string& utt : train_utts)
      data.classes.push_back(labels.bit_labels.at(utt)[bit]);
    const bool has_pos = std::find(data.classes.begin(), data.classes.end(), 1) !=
                         data.classes.end();
    const bool has_neg = std::find(data.classes.begin(), data.classes.end(), 0) !=
                         data.classes.end();
    if (!has_pos || !has_neg) {
      outcomes[bit].skipped = true;
      return;
    }
    MlpConfig config;
    config.input_dim = static_cast<int>(embeddings.dim);
    config.hidden = spec.hidden;
    config.output_dim = 2;
    config.learning_rate = spec.learning_rate;
    config.epochs = spec.epochs;
    config.seed = CombineSeed(
        spec.seed, "probe:" + TaskName(task) + ":" + labels.class_inventory[bit]);
    const MlpModel model = TrainProbe(data, config);

    std::vector<int> test_labels;
    for (const std::string& utt : test_utts)
      test_labels.push_back(labels.bit_labels.at(utt)[bit]);
    const ClassificationReport eval =
        EvaluateClassification(model, test_x, test_labels, kBinaryNames);
    outcomes[bit].metrics = eval.per_class[1];
    outcomes[bit].metrics.name = labels.class_inventory[bit];
    outcomes[bit].correct.resize(test_utts.size());
    const Eigen::MatrixXd logits = MlpForward(model, test_x);
    for (std::size_t i = 0; i < test_utts.size(); ++i) {
      const int pred = logits(static_cast<Eigen::Index>(i), 1) >
                               logits(static_cast<Eigen::Index>(i), 0)
                           ? 1
                           : 0;
      outcomes[bit].correct[i] = pred == test_labels[i] ? 1 : 0;
    }
  });

  TaskReport report;
  report.task = task;
  report.headline_name = task == TaskId::kWord ? "mean_word_fraction" : "mean_accuracy";
  report.train_size = train_utts.size();
  report.test_size = test_utts.size();

  std::size_t active = 0;
  for (std::size_t bit = 0; bit < num_bits; ++bit) {
    if (outcomes[bit].skipped) {
      report.skipped.push_back(labels.class_inventory[bit]);
      Log("task ", TaskName(task), ": probe '", labels.class_inventory[bit],
          "' skipped, single class in training data");
      continue;
    }
    ++active;
    report.per_class.push_back(outcomes[bit].metrics);
  }
  Require(active > 0, "every probe of task ", TaskName(task), " was skipped");

  std::vector<std::size_t> correct_per_utt(test_utts.size(), 0);
  for (std::size_t i = 0; i < test_utts.size(); ++i) {
    for (const BitOutcome& o : outcomes)
      if (!o.skipped && o.correct[i]) ++correct_per_utt[i];
  }
  report.headline = MeanFractionCorrect(correct_per_utt, active);
  return report;
}

TaskReport RegressionTask(TaskId task, const EmbeddingSet& embeddings,
                          const Manifest& manifest, const LabelSet& labels,
                          const ProbeTaskSpec& spec) {
  const SplitResult split =
      StratifiedSplit(manifest, spec.test_fraction, StratifyKey::kSpeaker, nullptr, spec.seed);
  const std::vector<std::string> train_utts = LabeledUtts(split.train, labels);
  const std::vector<std::string> test_utts = LabeledUtts(split.test, labels);
  Require(!train_utts.empty() && !test_utts.empty(), "empty split for task ", TaskName(task));

  double mean = 0.0;
  for (const std::string& utt : train_utts) mean += labels.real_labels.at(utt);
  mean /= static_cast<double>(train_utts.size());
  double var = 0.0;
  for (const std::string& utt : train_utts) {
    const double d = labels.real_labels.at(utt) - mean;
    var += d * d;
  }
  var /= static_cast<double>(train_utts.size());
  Require(var > 0.0, "regression target is constant on the training set");
  const double std_dev = std::sqrt(var);

  ProbeData data;
  data.inputs = GatherRows(embeddings, train_utts);
  data.targets.resize(static_cast<Eigen::Index>(train_utts.size()), 1);
  for (std::size_t i = 0; i < train_utts.size(); ++i)
    data.targets(static_cast<Eigen::Index>(i), 0) =
        (labels.real_labels.at(train_utts[i]) - mean) / std_dev;

  MlpConfig config;
  config.input_dim = static_cast<int>(embeddings.dim);
  config.hidden = spec.hidden;
  config.output_dim = 1;
  config.objective = ProbeObjective::kSquaredError;
  config.learning_rate = spec.learning_rate;
  config.epochs = spec.epochs;
  config.seed = CombineSeed(spec.seed, "probe:" + TaskName(task));
  const MlpModel model = TrainProbe(data, config);

  const Eigen::MatrixXd out = MlpForward(model, GatherRows(embeddings, test_utts));
  std::vector<double> pred, truth;
  for (std::size_t i = 0; i < test_utts.size(); ++i) {
    pred.push_back(out(static_cast<Eigen::Index>(i), 0) * std_dev + mean);
    truth.push_back(labels.real_labels.at(test_utts[i]));
  }

  TaskReport report;
  report.task = task;
  report.headline_name = "one_minus_nrmse";
  report.headline = OneMinusNrmse(pred, truth);
  report.train_size = train_utts.size();
  report.test_size = test_utts.size();
  return report;
}

}  // namespace

TaskReport RunTask(TaskId task, const EmbeddingSet& embeddings, const Manifest& manifest,
                   const ProbeTaskSpec& spec) {
  Require(spec.test_fraction > 0.0 && spec.test_fraction < 1.0,
          "test fraction must be in (0, 1)");
  std::vector<std::string> missing;
  for (const UtteranceRecord& rec : manifest.records)
    if (embeddings.vectors.count(rec.utt_id) == 0) missing.push_back(rec.utt_id);
  if (!missing.empty()) {
    std::ostringstream os;
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 8); ++i)
      os << (i ? ", " : "") << "'" << missing[i] << "'";
    if (missing.size() > 8) os << ", ...";
    Fail("embeddings missing for ", missing.size(), " manifest utterances: ", os.str());
  }

  const LabelSet labels = DeriveTaskLabels(manifest, task, spec.aux);
  if (labels.regression) return RegressionTask(task, embeddings, manifest, labels, spec);
  if (labels.multi_label) return MultiLabelTask(task, embeddings, manifest, labels, spec);
  return SingleLabelTask(task, embeddings, manifest, labels, spec);
}

void WriteTaskReportTsv(const std::string& path, const TaskReport& report) {
  std::ostringstream os;
  char buf[64];
  os << "task\t" << TaskName(report.task) << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", report.headline);
  os << report.headline_name << '\t' << buf << '\n';
  os << "train_size\t" << report.train_size << '\n';
  os << "test_size\t" << report.test_size << '\n';
  for (const std::string& name : report.skipped) os << "skipped\t" << name << '\n';
  if (!report.per_class.empty()) {
    os << "# class\tprecision\trecall\tf_score\tsupport\n";
    for (const PerClassMetrics& m : report.per_class) {
      os << m.name;
      std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\t%.6f\t", m.precision, m.recall, m.f_score);
      os << buf << m.support << '\n';
    }
  }
  AtomicWriteFile(path, os.str());
}

void WriteTaskReportJson(const std::string& path, const TaskReport& report) {
  nlohmann::json j;
  j["task"] = TaskName(report.task);
  j["headline_name"] = report.headline_name;
  j["headline"] = report.headline;
  j["train_size"] = report.train_size;
  j["test_size"] = report.test_size;
  j["skipped"] = report.skipped;
  nlohmann::json classes = nlohmann::json::array();
  for (const PerClassMetrics& m : report.per_class) {
    classes.push_back({{"name", m.name},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f_score", m.f_score},
                       {"support", m.support}});
  }
  j["per_class"] = classes;
  if (report.confusion.size() > 0) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < report.confusion.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < report.confusion.cols(); ++c)
        row.push_back(report.confusion(r, c));
      rows.push_back(row);
    }
    j["confusion"] = rows;
  }
  AtomicWriteFile(path, j.dump(2) + "\n");
}

}  // namespace vectorscope
