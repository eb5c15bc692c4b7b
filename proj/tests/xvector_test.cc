// tests/xvector_test.cc

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
#include <fstream>
#include <numeric>
#include <vector>

#include "testutil.hpp"
#include "vectorscope/xvector.hpp"

using namespace vectorscope;

namespace {

Eigen::MatrixXd RandomFeatures(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.Gaussian();
  return m;
}

double MaxAbsParam(const TdnnModel& model) {
  double top = 0.0;
  for (const auto& w : model.weights) top = std::max(top, w.cwiseAbs().maxCoeff());
  for (const auto& b : model.biases) top = std::max(top, b.cwiseAbs().maxCoeff());
  return top;
}

bool SameModel(const TdnnModel& a, const TdnnModel& b) {
  if (a.weights.size() != b.weights.size()) return false;
  for (std::size_t i = 0; i < a.weights.size(); ++i) {
    if (a.weights[i] != b.weights[i]) return false;
    if (a.biases[i] != b.biases[i]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("the full-size configuration matches the published architecture") {
  const TdnnConfig config = TdnnConfig::Default(512, 40);
  config.Validate();
  CHECK(config.feature_dim == 30);
  REQUIRE(config.frame_layers.size() == 5);
  CHECK(config.frame_layers[0].offsets == std::vector<int>{-2, -1, 0, 1, 2});
  CHECK(config.frame_layers[1].offsets == std::vector<int>{-2, 0, 2});
  CHECK(config.frame_layers[2].offsets == std::vector<int>{-3, 0, 3});
  CHECK(config.frame_layers[3].offsets == std::vector<int>{0});
  CHECK(config.frame_layers[4].offsets == std::vector<int>{0});
  CHECK(config.frame_layers[4].out_dim == 1500);
  CHECK(config.StatsDim() == 3000);
  CHECK(config.ReceptiveField() == 15);

  const TdnnModel model = InitTdnn(config, 1);
  // Frame layer 1 sees 5 spliced copies of 30 dims.
  CHECK(model.weights[0].rows() == 512);
  CHECK(model.weights[0].cols() == 150);
  // Segment layer 6 maps pooled stats to the embedding.
  CHECK(model.weights[5].rows() == 512);
  CHECK(model.weights[5].cols() == 3000);
  // Output layer.
  CHECK(model.weights.back().rows() == 40);
}

TEST_CASE("initialization is seed-deterministic and bounded") {
  const TdnnConfig config = TdnnConfig::Desk(16, 5);
  const TdnnModel a = InitTdnn(config, 42);
  const TdnnModel b = InitTdnn(config, 42);
  const TdnnModel c = InitTdnn(config, 43);
  CHECK(SameModel(a, b));
  CHECK_FALSE(SameModel(a, c));
  CHECK(MaxAbsParam(a) < 1.0);  // Glorot bounds are well inside this
  for (const auto& bias : a.biases) CHECK(bias.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("invalid configurations are rejected") {
  TdnnConfig config = TdnnConfig::Desk(16, 5);
  config.num_speakers = 0;
  CHECK_THROWS(config.Validate());
  config = TdnnConfig::Desk(16, 5);
  config.frame_layers[0].offsets = {1, -1};  // unsorted
  CHECK_THROWS(config.Validate());
}

TEST_CASE("stats pooling computes exact means and guarded deviations") {
  Eigen::MatrixXd acts(4, 2);
  acts << 1.0, 10.0, 2.0, 10.0, 3.0, 10.0, 4.0, 10.0;
  const Eigen::VectorXd pooled = StatsPool(acts);
  REQUIRE(pooled.size() == 4);
  CHECK(pooled(0) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(pooled(1) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(pooled(2) == doctest::Approx(std::sqrt(1.25)).epsilon(1e-9));
  // A constant column's deviation is sqrt(eps), not a hard zero.
  CHECK(pooled(3) <= 3.2e-5);
  CHECK(pooled(3) >= 0.0);
}

TEST_CASE("stats pooling is exactly permutation invariant") {
  const Eigen::MatrixXd acts = RandomFeatures(57, 9, 3);
  const Eigen::VectorXd base = StatsPool(acts);

  Rng rng(4);
  std::vector<Eigen::Index> order(57);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[rng.UniformInt(static_cast<std::uint64_t>(i))]);
  Eigen::MatrixXd shuffled(acts.rows(), acts.cols());
  for (Eigen::Index r = 0; r < acts.rows(); ++r) shuffled.row(r) = acts.row(order[r]);

  const Eigen::VectorXd permuted = StatsPool(shuffled);
  for (Eigen::Index i = 0; i < base.size(); ++i) CHECK(permuted(i) == base(i));
}

TEST_CASE("pooling gradients agree with finite differences") {
  const Eigen::MatrixXd acts = RandomFeatures(20, 3, 7);
  Rng rng(8);
  Eigen::VectorXd grad_out(6);
  for (Eigen::Index i = 0; i < 6; ++i) grad_out(i) = rng.Gaussian();
  const Eigen::MatrixXd grad = StatsPoolBackward(acts, grad_out);

  const double h = 1e-6;
  for (Eigen::Index r = 0; r < 5; ++r) {
    for (Eigen::Index c = 0; c < 3; ++c) {
      Eigen::MatrixXd plus = acts, minus = acts;
      plus(r, c) += h;
      minus(r, c) -= h;
      const double numeric =
          (grad_out.dot(StatsPool(plus)) - grad_out.dot(StatsPool(minus))) / (2 * h);
      CHECK(grad(r, c) == doctest::Approx(numeric).epsilon(1e-5));
    }
  }
}

TEST_CASE("too few frames for the receptive field is an error") {
  const TdnnConfig config = TdnnConfig::Desk(16, 5);
  const TdnnModel model = InitTdnn(config, 1);
  CHECK_THROWS(TdnnForward(model, RandomFeatures(14, 30, 2)));
  CHECK_NOTHROW(TdnnForward(model, RandomFeatures(15, 30, 2)));
}

TEST_CASE("uniform logits cost ln of the class count") {
  TdnnConfig config = TdnnConfig::Desk(16, 10);
  TdnnModel model = InitTdnn(config, 1);
  // Zero output layer makes every logit zero, a uniform distribution.
  model.weights.back().setZero();
  model.biases.back().setZero();
  const Eigen::MatrixXd feats = RandomFeatures(40, 30, 5);
  std::vector<TdnnExample> batch = {{&feats, 3}};
  TdnnGradients grads = ZeroGradients(model);
  const double loss = TdnnLossAndGrad(model, batch, &grads);
  CHECK(loss == doctest::Approx(std::log(10.0)).epsilon(1e-9));
}

TEST_CASE("network gradients agree with central differences") {
  TdnnConfig config = TdnnConfig::Desk(8, 3);
  config.feature_dim = 4;
  for (auto& layer : config.frame_layers) layer.out_dim = 6;
  config.segment7_dim = 8;
  TdnnModel model = InitTdnn(config, 11);

  const Eigen::MatrixXd f1 = RandomFeatures(20, 4, 21);
  const Eigen::MatrixXd f2 = RandomFeatures(17, 4, 22);
  const std::vector<TdnnExample> batch = {{&f1, 0}, {&f2, 2}};

  TdnnGradients grads = ZeroGradients(model);
  TdnnLossAndGrad(model, batch, &grads);

  Rng pick(31);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t layer = 0; layer < model.weights.size(); ++layer) {
    for (int probe = 0; probe < 6; ++probe) {
      const Eigen::Index r =
          static_cast<Eigen::Index>(pick.UniformInt(static_cast<std::uint64_t>(model.weights[layer].rows())));
      const Eigen::Index c =
          static_cast<Eigen::Index>(pick.UniformInt(static_cast<std::uint64_t>(model.weights[layer].cols())));
      TdnnModel plus = model, minus = model;
      plus.weights[layer](r, c) += h;
      minus.weights[layer](r, c) -= h;
      TdnnGradients unused = ZeroGradients(model);
      const double numeric =
          (TdnnLossAndGrad(plus, batch, &unused) - TdnnLossAndGrad(minus, batch, &unused)) /
          (2 * h);
      const double analytic = grads.weights[layer](r, c);
      const double rel = std::fabs(analytic - numeric) /
                         std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("chunks respect bounds and cover the sequence") {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Chunk chunk = SampleChunk(350, 200, 400, rng);
    CHECK(chunk.len >= 200);
    CHECK(chunk.len <= 350);
    CHECK(chunk.start >= 0);
    CHECK(chunk.start + chunk.len <= 350);
  }
}

TEST_CASE("zero training epochs returns the initial model") {
  const TdnnConfig config = TdnnConfig::Desk(8, 2);
  const TdnnModel init = InitTdnn(config, 3);
  const Eigen::MatrixXd f = RandomFeatures(60, 30, 9);
  TdnnTrainConfig train;
  train.epochs = 0;
  train.chunk_min = 20;
  train.chunk_max = 40;
  const TdnnTrainResult result = TrainTdnn(init, {{&f, 0}, {&f, 1}}, train);
  CHECK(SameModel(result.model, init));
  CHECK(result.step_losses.empty());
}

TEST_CASE("training is deterministic and strictly reduces the early loss") {
  TdnnConfig config = TdnnConfig::Desk(8, 2);
  config.feature_dim = 6;
  for (auto& layer : config.frame_layers) layer.out_dim = 8;
  config.segment7_dim = 8;
  const TdnnModel init = InitTdnn(config, 3);

  // Two speaker classes with a constant offset between their features; the
  // whole dataset fits in one batch, so chunk sampling is the only noise.
  const Eigen::MatrixXd f0 = RandomFeatures(80, 6, 10);
  const Eigen::MatrixXd f1 = RandomFeatures(80, 6, 11).array() + 2.0;
  std::vector<TdnnExample> data = {{&f0, 0}, {&f1, 1}};

  TdnnTrainConfig train;
  train.epochs = 10;
  train.batch_size = 2;
  train.chunk_min = 20;
  train.chunk_max = 40;
  train.seed = 17;
  train.lr = 1e-3;
  const TdnnTrainResult a = TrainTdnn(init, data, train);
  const TdnnTrainResult b = TrainTdnn(init, data, train);
  CHECK(SameModel(a.model, b.model));
  REQUIRE(a.step_losses.size() == b.step_losses.size());
  for (std::size_t i = 0; i < a.step_losses.size(); ++i)
    CHECK(a.step_losses[i] == b.step_losses[i]);

  // Each step draws a fresh chunk, so per-step losses are noisy; compare
  // the first and last thirds instead of demanding a monotone sequence.
  REQUIRE(a.step_losses.size() == 10);
  const double early =
      std::accumulate(a.step_losses.begin(), a.step_losses.begin() + 3, 0.0);
  const double late =
      std::accumulate(a.step_losses.end() - 3, a.step_losses.end(), 0.0);
  CHECK(late < early);
  CHECK(a.step_losses.back() < a.step_losses.front());
}

TEST_CASE("the extracted embedding is the pre-activation of the first segment layer") {
  const TdnnConfig config = TdnnConfig::Desk(16, 4);
  const TdnnModel model = InitTdnn(config, 6);
  const Eigen::MatrixXd f = RandomFeatures(50, 30, 12);
  const Eigen::VectorXd emb = ExtractXvector(model, f);
  const TdnnOutput out = TdnnForward(model, f);
  CHECK(emb == out.embedding);
  // The pre-activation must go negative somewhere; a rectified version
  // would differ.
  CHECK(emb.minCoeff() < 0.0);
}

TEST_CASE("models survive a save and load round trip") {
  testing::TempDir dir;
  const TdnnConfig config = TdnnConfig::Desk(12, 7);
  const TdnnModel model = InitTdnn(config, 19);
  const std::string path = dir.Path("model.mdl");
  SaveTdnn(path, model);
  const TdnnModel loaded = LoadTdnn(path);
  CHECK(loaded.config.embedding_dim == 12);
  CHECK(loaded.config.num_speakers == 7);
  REQUIRE(loaded.weights.size() == model.weights.size());

  // Files store parameters as 32-bit floats, so loading quantizes.  Every
  // loaded weight must equal its source cast through float, and a second
  // save of the loaded model must be byte-identical (the format is a fixed
  // point of its own quantization).
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const Eigen::MatrixXd& w = model.weights[l];
    const Eigen::MatrixXd& v = loaded.weights[l];
    REQUIRE(w.rows() == v.rows());
    REQUIRE(w.cols() == v.cols());
    for (Eigen::Index i = 0; i < w.size(); ++i)
      CHECK(v(i) == static_cast<double>(static_cast<float>(w(i))));
    for (Eigen::Index i = 0; i < model.biases[l].size(); ++i)
      CHECK(loaded.biases[l](i) ==
            static_cast<double>(static_cast<float>(model.biases[l](i))));
  }
  const std::string again = dir.Path("again.mdl");
  SaveTdnn(again, loaded);
  CHECK(testing::ReadFileBytes(path) == testing::ReadFileBytes(again));

  // Quantization barely moves the extracted embedding.
  const Eigen::MatrixXd f = RandomFeatures(30, 30, 2);
  const Eigen::VectorXd a = ExtractXvector(model, f);
  const Eigen::VectorXd b = ExtractXvector(loaded, f);
  REQUIRE(a.size() == b.size());
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("model files with the wrong magic are rejected") {
  testing::TempDir dir;
  const std::string path = dir.Path("bogus.mdl");
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOTAMODEL";
  }
  CHECK_THROWS(LoadTdnn(path));
}

TEST_CASE("constant input yields a constant-mean near-zero-deviation pooled vector") {
  const TdnnConfig config = TdnnConfig::Desk(8, 2);
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(40, 5, 2.5);
  const Eigen::VectorXd pooled = StatsPool(constant);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(pooled(i) == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(pooled(5 + i) <= 3.2e-5);
  }
  (void)config;
}
