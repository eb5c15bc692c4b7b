// core/include/vectorscope/ivector.hpp

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

#ifndef VECTORSCOPE_IVECTOR_HPP_
#define VECTORSCOPE_IVECTOR_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vectorscope {

struct GmmUbm {
  bool full_cov = false;
  Eigen::VectorXd weights;                 // K, sums to 1
  Eigen::MatrixXd means;                   // K x F
  Eigen::MatrixXd vars;                    // K x F (diagonal covariances)
  std::vector<Eigen::MatrixXd> full_covs;  // K of F x F when full_cov

  int NumComponents() const { return static_cast<int>(weights.size()); }
  int Dim() const { return static_cast<int>(means.cols()); }
};

struct UbmTrainConfig {
  int num_components = 64;
  int iters = 10;
  bool full_cov = false;
  std::uint64_t seed = 0;
  double floor_factor = 1e-4;  // of the global per-dimension variance
  std::size_t kmeans_subsample = 100000;
  int kmeans_iters = 10;
};

struct UbmTrainResult {
  GmmUbm ubm;
  // Mean per-frame log-likelihood, one entry per EM iteration, evaluated
  // for the parameters that iteration started from.
  std::vector<double> log_likelihoods;
};

UbmTrainResult TrainUbm(const std::vector<const Eigen::MatrixXd*>& features,
                        const UbmTrainConfig& config);

// Log p(x) under the mixture; optionally fills per-component posteriors.
double FrameLogLikelihood(const GmmUbm& ubm, const Eigen::VectorXd& x,
                          Eigen::VectorXd* posteriors = nullptr);

struct BaumWelchStats {
  Eigen::VectorXd n;  // K soft counts
  Eigen::MatrixXd f;  // K x F first-order sums, centered on the UBM means
};

BaumWelchStats ZeroStats(int num_components, int dim);
BaumWelchStats AccumulateStats(const GmmUbm& ubm, const Eigen::MatrixXd& features);

// Total-variability matrix stored per component: block k maps the latent
// w to the component-k mean offset.
struct TotalVariability {
  int rank = 0;
  std::vector<Eigen::MatrixXd> blocks;  // K of F x rank
};

TotalVariability InitTv(const GmmUbm& ubm, int rank, std::uint64_t seed);

struct TvTrainConfig {
  int rank = 64;
  int iters = 5;
  std::uint64_t seed = 0;
};

struct TvTrainResult {
  TotalVariability tv;
  // Latent-model evidence (up to a T-independent constant), one entry per
  // iteration, evaluated for the T that iteration started from.
  std::vector<double> objectives;
};

TvTrainResult TrainTv(const std::vector<BaumWelchStats>& stats, const GmmUbm& ubm,
                      const TvTrainConfig& config);

// Posterior mean of w: (I + T' Sigma^-1 N T)^-1 T' Sigma^-1 f.
Eigen::VectorXd ExtractIvector(const GmmUbm& ubm, const TotalVariability& tv,
                               const BaumWelchStats& stats);

void SaveIvectorModel(const std::string& path, const GmmUbm& ubm, const TotalVariability& tv);
void LoadIvectorModel(const std::string& path, GmmUbm* ubm, TotalVariability* tv);

}  // namespace vectorscope

#endif  // VECTORSCOPE_IVECTOR_HPP_
