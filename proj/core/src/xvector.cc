// core/src/xvector.cc

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

#include "vectorscope/xvector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vectorscope/archive.hpp"
#include "vectorscope/optimizer.hpp"

namespace vectorscope {

namespace {

std::vector<FrameLayerSpec> StandardContexts(int dim1to4, int dim5) {
  return {{{-2, -1, 0, 1, 2}, dim1to4},
          {{-2, 0, 2}, dim1to4},
          {{-3, 0, 3}, dim1to4},
          {{0}, dim1to4},
          {{0}, dim5}};
}

}  // namespace

TdnnConfig TdnnConfig::Default(int embedding_dim, int num_speakers) {
  TdnnConfig cfg;
  cfg.feature_dim = 30;
  cfg.frame_layers = StandardContexts(512, 1500);
  cfg.embedding_dim = embedding_dim;
  cfg.segment7_dim = 512;
  cfg.num_speakers = num_speakers;
  return cfg;
}

TdnnConfig TdnnConfig::Desk(int embedding_dim, int num_speakers) {
  TdnnConfig cfg;
  cfg.feature_dim = 30;
  cfg.frame_layers = StandardContexts(48, 96);
  cfg.embedding_dim = embedding_dim;
  cfg.segment7_dim = 48;
  cfg.num_speakers = num_speakers;
  return cfg;
}

int TdnnConfig::ReceptiveField() const {
  int field = 1;
  for (const FrameLayerSpec& layer : frame_layers)
    field += layer.offsets.back() - layer.offsets.front();
  return field;
}

void TdnnConfig::Validate() const {
  Require(feature_dim >= 1, "feature_dim must be >= 1");
  Require(!frame_layers.empty(), "need at least one frame layer");
  for (std::size_t l = 0; l < frame_layers.size(); ++l) {
    const FrameLayerSpec& layer = frame_layers[l];
    Require(!layer.offsets.empty(), "frame layer ", l + 1, " has no offsets");
    Require(std::is_sorted(layer.offsets.begin(), layer.offsets.end()) &&
                std::adjacent_find(layer.offsets.begin(), layer.offsets.end()) ==
                    layer.offsets.end(),
            "frame layer ", l + 1, " offsets must be sorted and distinct");
    Require(layer.out_dim >= 1, "frame layer ", l + 1, " out_dim must be >= 1");
  }
  Require(embedding_dim >= 1, "embedding_dim must be >= 1");
  Require(segment7_dim >= 1, "segment7_dim must be >= 1");
  Require(num_speakers >= 2, "num_speakers must be >= 2, got ", num_speakers);
}

TdnnModel InitTdnn(const TdnnConfig& config, std::uint64_t seed) {
  config.Validate();
  TdnnModel model;
  model.config = config;
  Rng rng(CombineSeed(seed, "tdnn-init"));
  int in_dim = config.feature_dim;
  for (const FrameLayerSpec& layer : config.frame_layers) {
    const int spliced = in_dim * static_cast<int>(layer.offsets.size());
    model.weights.push_back(GlorotUniform(layer.out_dim, spliced, spliced, layer.out_dim, rng));
    model.biases.push_back(Eigen::VectorXd::Zero(layer.out_dim));
    in_dim = layer.out_dim;
  }
  const int stats = config.StatsDim();
  model.weights.push_back(
      GlorotUniform(config.embedding_dim, stats, stats, config.embedding_dim, rng));
  model.biases.push_back(Eigen::VectorXd::Zero(config.embedding_dim));
  model.weights.push_back(GlorotUniform(config.segment7_dim, config.embedding_dim,
                                        config.embedding_dim, config.segment7_dim, rng));
  model.biases.push_back(Eigen::VectorXd::Zero(config.segment7_dim));
  model.weights.push_back(GlorotUniform(config.num_speakers, config.segment7_dim,
                                        config.segment7_dim, config.num_speakers, rng));
  model.biases.push_back(Eigen::VectorXd::Zero(config.num_speakers));
  return model;
}

Eigen::VectorXd StatsPool(const Eigen::MatrixXd& activations) {
  const Eigen::Index rows = activations.rows();
  const Eigen::Index cols = activations.cols();
  Require(rows >= 1, "StatsPool: no frames");
  Eigen::VectorXd out(2 * cols);
  // 113-bit accumulation keeps the sums exact for realistic activation
  // magnitudes, which makes pooling independent of the frame order.
  for (Eigen::Index j = 0; j < cols; ++j) {
    __float128 sum = 0;
    for (Eigen::Index t = 0; t < rows; ++t) sum += (__float128)activations(t, j);
    const double mean = static_cast<double>(sum / (__float128)rows);
    __float128 sq = 0;
    for (Eigen::Index t = 0; t < rows; ++t) {
      const double d = activations(t, j) - mean;
      sq += (__float128)(d)*d;
    }
    const double var = static_cast<double>(sq / (__float128)rows);
    out[j] = mean;
    out[cols + j] = std::sqrt(var + 1e-9);
  }
  return out;
}

Eigen::MatrixXd StatsPoolBackward(const Eigen::MatrixXd& activations,
                                  const Eigen::VectorXd& grad_out) {
  const Eigen::Index rows = activations.rows();
  const Eigen::Index cols = activations.cols();
  Require(grad_out.size() == 2 * cols, "StatsPoolBackward: gradient size mismatch");
  const Eigen::VectorXd pooled = StatsPool(activations);
  Eigen::MatrixXd grad_in(rows, cols);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const double mean = pooled[j];
    const double stddev = pooled[cols + j];
    const double gmean = grad_out[j];
    const double gstd = grad_out[cols + j];
    for (Eigen::Index t = 0; t < rows; ++t)
      grad_in(t, j) =
          gmean * inv_rows + gstd * (activations(t, j) - mean) * inv_rows / stddev;
  }
  return grad_in;
}

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> frame_in;      // input to each frame layer
  std::vector<Eigen::MatrixXd> frame_preact;  // pre-ReLU output per frame layer
  Eigen::MatrixXd pooled_in;                  // post-ReLU activations fed to pooling
  Eigen::VectorXd pooled;
  Eigen::VectorXd preact6, h6, preact7, h7, logits;
};

Eigen::MatrixXd Splice(const Eigen::MatrixXd& input, const std::vector<int>& offsets) {
  const Eigen::Index dim = input.cols();
  const int spread = offsets.back() - offsets.front();
  const Eigen::Index t_out = input.rows() - spread;
  Eigen::MatrixXd spliced(t_out, dim * static_cast<Eigen::Index>(offsets.size()));
  for (std::size_t o = 0; o < offsets.size(); ++o) {
    const Eigen::Index shift = offsets[o] - offsets.front();
    spliced.middleCols(static_cast<Eigen::Index>(o) * dim, dim) =
        input.middleRows(shift, t_out);
  }
  return spliced;
}

void RunForward(const TdnnModel& model, const Eigen::MatrixXd& features, ForwardCache* cache) {
  const TdnnConfig& cfg = model.config;
  Require(features.cols() == cfg.feature_dim, "feature dim ", features.cols(),
          " does not match model feature_dim ", cfg.feature_dim);
  Require(features.rows() >= cfg.ReceptiveField(), "need at least ", cfg.ReceptiveField(),
          " frames of context, got ", features.rows());
  cache->frame_in.clear();
  cache->frame_preact.clear();
  Eigen::MatrixXd h = features;
  for (std::size_t l = 0; l < cfg.frame_layers.size(); ++l) {
    cache->frame_in.push_back(h);
    const Eigen::MatrixXd spliced = Splice(h, cfg.frame_layers[l].offsets);
    Eigen::MatrixXd preact = spliced * model.weights[l].transpose();
    preact.rowwise() += model.biases[l].transpose();
    cache->frame_preact.push_back(preact);
    h = preact.cwiseMax(0.0);
  }
  cache->pooled_in = h;
  cache->pooled = StatsPool(h);

  const std::size_t s6 = cfg.frame_layers.size();
  cache->preact6 = model.weights[s6] * cache->pooled + model.biases[s6];
  cache->h6 = cache->preact6.cwiseMax(0.0);
  cache->preact7 = model.weights[s6 + 1] * cache->h6 + model.biases[s6 + 1];
  cache->h7 = cache->preact7.cwiseMax(0.0);
  cache->logits = model.weights[s6 + 2] * cache->h7 + model.biases[s6 + 2];
}

double SoftmaxLossGrad(const Eigen::VectorXd& logits, int label, Eigen::VectorXd* grad) {
  const double max = logits.maxCoeff();
  const Eigen::ArrayXd shifted = logits.array() - max;
  const double lse = max + std::log(shifted.exp().sum());
  *grad = (logits.array() - lse).exp().matrix();
  (*grad)[label] -= 1.0;
  return lse - logits[label];
}

// Gradients for one utterance, accumulated into *grads.
double BackwardOne(const TdnnModel& model, const Eigen::MatrixXd& features, int label,
                   TdnnGradients* grads) {
  const TdnnConfig& cfg = model.config;
  Require(label >= 0 && label < cfg.num_speakers, "speaker index ", label, " out of range");
  ForwardCache cache;
  RunForward(model, features, &cache);

  Eigen::VectorXd dlogits;
  const double loss = SoftmaxLossGrad(cache.logits, label, &dlogits);

  const std::size_t s6 = cfg.frame_layers.size();
  grads->weights[s6 + 2] += dlogits * cache.h7.transpose();
  grads->biases[s6 + 2] += dlogits;
  Eigen::VectorXd dh7 = model.weights[s6 + 2].transpose() * dlogits;
  Eigen::VectorXd dpre7 =
      (cache.preact7.array() > 0.0).select(dh7.array(), 0.0).matrix();
  grads->weights[s6 + 1] += dpre7 * cache.h6.transpose();
  grads->biases[s6 + 1] += dpre7;
  Eigen::VectorXd dh6 = model.weights[s6 + 1].transpose() * dpre7;
  Eigen::VectorXd dpre6 =
      (cache.preact6.array() > 0.0).select(dh6.array(), 0.0).matrix();
  grads->weights[s6] += dpre6 * cache.pooled.transpose();
  grads->biases[s6] += dpre6;
  Eigen::VectorXd dpooled = model.weights[s6].transpose() * dpre6;

  Eigen::MatrixXd dh = StatsPoolBackward(cache.pooled_in, dpooled);
  for (std::size_t li = cfg.frame_layers.size(); li-- > 0;) {
    const std::vector<int>& offsets = cfg.frame_layers[li].offsets;
    const Eigen::MatrixXd dpre =
        (cache.frame_preact[li].array() > 0.0).select(dh.array(), 0.0).matrix();
    const Eigen::MatrixXd spliced = Splice(cache.frame_in[li], offsets);
    grads->weights[li] += dpre.transpose() * spliced;
    grads->biases[li] += dpre.colwise().sum().transpose();
    const Eigen::MatrixXd dspliced = dpre * model.weights[li];
    const Eigen::Index dim = cache.frame_in[li].cols();
    dh = Eigen::MatrixXd::Zero(cache.frame_in[li].rows(), dim);
    for (std::size_t o = 0; o < offsets.size(); ++o) {
      const Eigen::Index shift = offsets[o] - offsets.front();
      dh.middleRows(shift, dpre.rows()) +=
          dspliced.middleCols(static_cast<Eigen::Index>(o) * dim, dim);
    }
  }
  return loss;
}

std::string LayerNormSummary(const TdnnModel& model) {
  std::ostringstream out;
  for (std::size_t l = 0; l < model.weights.size(); ++l)
    out << " layer" << l << " |W|=" << model.weights[l].norm()
        << " |b|=" << model.biases[l].norm();
  return out.str();
}

}  // namespace

TdnnOutput TdnnForward(const TdnnModel& model, const Eigen::MatrixXd& features) {
  ForwardCache cache;
  RunForward(model, features, &cache);
  TdnnOutput out;
  out.logits = cache.logits;
  out.embedding = cache.preact6;
  return out;
}

TdnnGradients ZeroGradients(const TdnnModel& model) {
  TdnnGradients grads;
  for (const auto& w : model.weights) grads.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : model.biases) grads.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return grads;
}

double TdnnLossAndGrad(const TdnnModel& model, const std::vector<TdnnExample>& batch,
                       TdnnGradients* grads) {
  Require(!batch.empty(), "empty batch");
  *grads = ZeroGradients(model);

  std::vector<TdnnGradients> partial(batch.size());
  std::vector<double> losses(batch.size());
  ParallelFor(batch.size(), [&](std::size_t i) {
    partial[i] = ZeroGradients(model);
    losses[i] = BackwardOne(model, *batch[i].features, batch[i].speaker, &partial[i]);
  });

  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    loss += losses[i];
    for (std::size_t l = 0; l < grads->weights.size(); ++l) {
      grads->weights[l] += partial[i].weights[l];
      grads->biases[l] += partial[i].biases[l];
    }
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  loss *= scale;
  for (std::size_t l = 0; l < grads->weights.size(); ++l) {
    grads->weights[l] *= scale;
    grads->biases[l] *= scale;
  }
  Require(std::isfinite(loss), "non-finite training loss;", LayerNormSummary(model));
  return loss;
}

Chunk SampleChunk(Eigen::Index num_frames, int min_len, int max_len, Rng& rng) {
  Require(min_len >= 1 && max_len >= min_len, "bad chunk range [", min_len, ",", max_len, "]");
  Require(num_frames >= min_len, "utterance of ", num_frames,
          " frames is shorter than chunk_min ", min_len);
  Chunk chunk;
  const Eigen::Index hi = std::min<Eigen::Index>(max_len, num_frames);
  chunk.len = min_len + static_cast<Eigen::Index>(
                            rng.UniformInt(static_cast<std::uint64_t>(hi - min_len + 1)));
  chunk.start = static_cast<Eigen::Index>(
      rng.UniformInt(static_cast<std::uint64_t>(num_frames - chunk.len + 1)));
  return chunk;
}

TdnnTrainResult TrainTdnn(const TdnnModel& init, const std::vector<TdnnExample>& data,
                          const TdnnTrainConfig& config) {
  Require(!data.empty(), "TrainTdnn: empty dataset");
  Require(config.chunk_min >= init.config.ReceptiveField(), "chunk_min ", config.chunk_min,
          " is below the ", init.config.ReceptiveField(), "-frame receptive field");
  Require(config.batch_size >= 1 && config.epochs >= 0, "bad train config");

  std::vector<TdnnExample> usable;
  for (const TdnnExample& ex : data)
    if (ex.features->rows() >= config.chunk_min) usable.push_back(ex);
  if (usable.size() < data.size())
    Warn("TrainTdnn: dropped ", data.size() - usable.size(), " of ", data.size(),
         " utterances shorter than ", config.chunk_min, " frames");
  Require(!usable.empty(), "TrainTdnn: every utterance is shorter than chunk_min");

  TdnnTrainResult result;
  result.model = init;
  Eigen::VectorXd params = FlattenTensors(result.model.weights, result.model.biases);
  AdamOptimizer adam(params.size(), config.lr);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Rng epoch_rng(CombineSeed(config.seed, "tdnn-epoch:" + std::to_string(epoch)));
    std::vector<std::size_t> order(usable.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[epoch_rng.UniformInt(i)]);

    for (std::size_t pos = 0; pos < order.size(); pos += config.batch_size) {
      const std::size_t batch_n =
          std::min<std::size_t>(config.batch_size, order.size() - pos);
      // Chunks are drawn serially so the draw sequence does not depend on
      // worker scheduling.
      std::vector<Eigen::MatrixXd> chunks(batch_n);
      std::vector<TdnnExample> batch(batch_n);
      for (std::size_t b = 0; b < batch_n; ++b) {
        const TdnnExample& ex = usable[order[pos + b]];
        const Chunk c =
            SampleChunk(ex.features->rows(), config.chunk_min, config.chunk_max, epoch_rng);
        chunks[b] = ex.features->middleRows(c.start, c.len);
        batch[b] = {&chunks[b], ex.speaker};
      }
      TdnnGradients grads;
      const double loss = TdnnLossAndGrad(result.model, batch, &grads);
      result.step_losses.push_back(loss);
      const Eigen::VectorXd grad_flat = FlattenTensors(grads.weights, grads.biases);
      adam.Step(grad_flat, &params);
      UnflattenTensors(params, &result.model.weights, &result.model.biases);
    }
    if (config.verbose && !result.step_losses.empty())
      Log("TrainTdnn: epoch ", epoch + 1, "/", config.epochs, " loss ",
          result.step_losses.back());
  }
  return result;
}

Eigen::VectorXd ExtractXvector(const TdnnModel& model, const Eigen::MatrixXd& features) {
  return TdnnForward(model, features).embedding;
}

double TdnnAccuracy(const TdnnModel& model, const std::vector<TdnnExample>& data) {
  Require(!data.empty(), "TdnnAccuracy: empty dataset");
  std::vector<int> correct(data.size(), 0);
  ParallelFor(data.size(), [&](std::size_t i) {
    const Eigen::VectorXd logits = TdnnForward(model, *data[i].features).logits;
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < logits.size(); ++k)
      if (logits[k] > logits[best]) best = k;
    correct[i] = best == data[i].speaker ? 1 : 0;
  });
  double sum = 0;
  for (int c : correct) sum += c;
  return sum / static_cast<double>(data.size());
}

static const char kXvecMagic[] = "VSXV1";

void SaveTdnn(const std::string& path, const TdnnModel& model) {
  BinaryWriter w;
  w.PutMagic(kXvecMagic);
  const TdnnConfig& cfg = model.config;
  w.PutU32(static_cast<std::uint32_t>(cfg.feature_dim));
  w.PutU32(static_cast<std::uint32_t>(cfg.frame_layers.size()));
  for (const FrameLayerSpec& layer : cfg.frame_layers) {
    w.PutU32(static_cast<std::uint32_t>(layer.offsets.size()));
    for (int o : layer.offsets) w.PutU32(static_cast<std::uint32_t>(static_cast<std::int32_t>(o)));
    w.PutU32(static_cast<std::uint32_t>(layer.out_dim));
  }
  w.PutU32(static_cast<std::uint32_t>(cfg.embedding_dim));
  w.PutU32(static_cast<std::uint32_t>(cfg.segment7_dim));
  w.PutU32(static_cast<std::uint32_t>(cfg.num_speakers));
  for (const auto& weight : model.weights) w.PutMatrixF32(weight);
  for (const auto& bias : model.biases) w.PutVectorF32(bias);
  w.WriteTo(path);
}

TdnnModel LoadTdnn(const std::string& path) {
  BinaryReader r = BinaryReader::FromFile(path);
  r.ExpectMagic(kXvecMagic);
  TdnnConfig cfg;
  cfg.feature_dim = static_cast<int>(r.GetU32());
  const std::uint32_t n_layers = r.GetU32();
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    FrameLayerSpec layer;
    const std::uint32_t n_offsets = r.GetU32();
    for (std::uint32_t o = 0; o < n_offsets; ++o)
      layer.offsets.push_back(static_cast<std::int32_t>(r.GetU32()));
    layer.out_dim = static_cast<int>(r.GetU32());
    cfg.frame_layers.push_back(std::move(layer));
  }
  cfg.embedding_dim = static_cast<int>(r.GetU32());
  cfg.segment7_dim = static_cast<int>(r.GetU32());
  cfg.num_speakers = static_cast<int>(r.GetU32());
  cfg.Validate();

  TdnnModel model;
  model.config = cfg;
  int in_dim = cfg.feature_dim;
  for (const FrameLayerSpec& layer : cfg.frame_layers) {
    const int spliced = in_dim * static_cast<int>(layer.offsets.size());
    model.weights.push_back(r.GetMatrixF32(layer.out_dim, spliced));
    in_dim = layer.out_dim;
  }
  model.weights.push_back(r.GetMatrixF32(cfg.embedding_dim, cfg.StatsDim()));
  model.weights.push_back(r.GetMatrixF32(cfg.segment7_dim, cfg.embedding_dim));
  model.weights.push_back(r.GetMatrixF32(cfg.num_speakers, cfg.segment7_dim));
  for (const FrameLayerSpec& layer : cfg.frame_layers)
    model.biases.push_back(r.GetVectorF32(layer.out_dim));
  model.biases.push_back(r.GetVectorF32(cfg.embedding_dim));
  model.biases.push_back(r.GetVectorF32(cfg.segment7_dim));
  model.biases.push_back(r.GetVectorF32(cfg.num_speakers));
  Require(r.AtEnd(), "'", path, "': trailing bytes after model payload");
  return model;
}

}  // namespace vectorscope
