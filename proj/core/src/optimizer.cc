// core/src/optimizer.cc

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

#include "vectorscope/optimizer.hpp"

#include <cmath>

#include "vectorscope/common.hpp"

namespace vectorscope {

AdamOptimizer::AdamOptimizer(Eigen::Index dim, double lr, double beta1, double beta2,
                             double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
  m_ = Eigen::VectorXd::Zero(dim);
  v_ = Eigen::VectorXd::Zero(dim);
}

void AdamOptimizer::Step(const Eigen::VectorXd& grad, Eigen::VectorXd* params) {
  Require(grad.size() == m_.size() && params->size() == m_.size(),
          "Adam dim mismatch: state ", m_.size(), ", grad ", grad.size(), ", params ",
          params->size());
  ++step_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double bias1 = 1.0 - std::pow(beta1_, step_);
  const double bias2 = 1.0 - std::pow(beta2_, step_);
  params->array() -= lr_ * (m_.array() / bias1) /
                     ((v_.array() / bias2).sqrt() + epsilon_);
}

Eigen::VectorXd FlattenTensors(const std::vector<Eigen::MatrixXd>& weights,
                               const std::vector<Eigen::VectorXd>& biases) {
  Eigen::Index total = 0;
  for (const auto& w : weights) total += w.size();
  for (const auto& b : biases) total += b.size();
  Eigen::VectorXd flat(total);
  Eigen::Index pos = 0;
  for (const auto& w : weights) {
    flat.segment(pos, w.size()) = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
    pos += w.size();
  }
  for (const auto& b : biases) {
    flat.segment(pos, b.size()) = b;
    pos += b.size();
  }
  return flat;
}

void UnflattenTensors(const Eigen::VectorXd& flat, std::vector<Eigen::MatrixXd>* weights,
                      std::vector<Eigen::VectorXd>* biases) {
  Eigen::Index pos = 0;
  for (auto& w : *weights) {
    Require(pos + w.size() <= flat.size(), "flat parameter vector too short");
    Eigen::Map<Eigen::VectorXd>(w.data(), w.size()) = flat.segment(pos, w.size());
    pos += w.size();
  }
  for (auto& b : *biases) {
    Require(pos + b.size() <= flat.size(), "flat parameter vector too short");
    b = flat.segment(pos, b.size());
    pos += b.size();
  }
  Require(pos == flat.size(), "flat parameter vector has ", flat.size() - pos,
          " unused entries");
}

Eigen::MatrixXd GlorotUniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                              Eigen::Index fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Eigen::MatrixXd w(rows, cols);
  // Row-major fill so the draw order is independent of Eigen's layout.
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = rng.Uniform(-a, a);
  return w;
}

}  // namespace vectorscope
