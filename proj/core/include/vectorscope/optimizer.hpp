// core/include/vectorscope/optimizer.hpp

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

#ifndef VECTORSCOPE_OPTIMIZER_HPP_
#define VECTORSCOPE_OPTIMIZER_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace vectorscope {

// Adam over a flat parameter vector; used by both the TDNN and the probes.
class AdamOptimizer {
 public:
  AdamOptimizer(Eigen::Index dim, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void Step(const Eigen::VectorXd& grad, Eigen::VectorXd* params);
  int StepCount() const { return step_; }

 private:
  double lr_, beta1_, beta2_, epsilon_;
  int step_ = 0;
  Eigen::VectorXd m_, v_;
};

// Flat view over a weight/bias tensor list, column-major per tensor, in
// list order with all weights before all biases.
Eigen::VectorXd FlattenTensors(const std::vector<Eigen::MatrixXd>& weights,
                               const std::vector<Eigen::VectorXd>& biases);
void UnflattenTensors(const Eigen::VectorXd& flat, std::vector<Eigen::MatrixXd>* weights,
                      std::vector<Eigen::VectorXd>* biases);

// Scaled uniform init, a = sqrt(6 / (fan_in + fan_out)).
Eigen::MatrixXd GlorotUniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                              Eigen::Index fan_out, class Rng& rng);

}  // namespace vectorscope

#endif  // VECTORSCOPE_OPTIMIZER_HPP_
