// core/src/ivector.cc

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

#include "vectorscope/ivector.hpp"

#include <algorithm>
#include <cmath>

#include "vectorscope/archive.hpp"
#include "vectorscope/common.hpp"

namespace vectorscope {

namespace {

constexpr double kTwoPi = 2.0 * M_PI;

// Per-frame per-component log(w_k) + log N(x; mu_k, Sigma_k).
Eigen::MatrixXd ComponentLogDensities(const GmmUbm& ubm, const Eigen::MatrixXd& frames) {
  const int K = ubm.NumComponents();
  const int F = ubm.Dim();
  Require(frames.cols() == F, "feature dim ", frames.cols(), " does not match UBM dim ", F);
  Eigen::MatrixXd logp(frames.rows(), K);
  for (int k = 0; k < K; ++k) {
    const Eigen::MatrixXd centered = frames.rowwise() - ubm.means.row(k);
    const double logw = std::log(ubm.weights[k]);
    if (ubm.full_cov) {
      const Eigen::LLT<Eigen::MatrixXd> llt(ubm.full_covs[k]);
      Require(llt.info() == Eigen::Success, "UBM component ", k,
              " covariance is not positive-definite");
      double logdet = 0.0;
      for (int f = 0; f < F; ++f) logdet += 2.0 * std::log(llt.matrixL()(f, f));
      const Eigen::MatrixXd solved = llt.matrixL().solve(centered.transpose());
      const double offset = logw - 0.5 * (F * std::log(kTwoPi) + logdet);
      logp.col(k).array() =
          offset - 0.5 * solved.colwise().squaredNorm().transpose().array();
    } else {
      const Eigen::VectorXd inv_var =
          ubm.vars.row(k).transpose().array().inverse().matrix();
      const double logdet = ubm.vars.row(k).array().log().sum();
      const double offset = logw - 0.5 * (F * std::log(kTwoPi) + logdet);
      logp.col(k).array() =
          offset - 0.5 * (centered.array().square().matrix() * inv_var).array();
    }
  }
  return logp;
}

// Row-wise logsumexp and the corresponding responsibilities.
Eigen::VectorXd Responsibilities(const Eigen::MatrixXd& logp, Eigen::MatrixXd* resp) {
  Eigen::VectorXd lse(logp.rows());
  for (Eigen::Index t = 0; t < logp.rows(); ++t) {
    const double max = logp.row(t).maxCoeff();
    lse[t] = max + std::log((logp.row(t).array() - max).exp().sum());
  }
  if (resp != nullptr) *resp = (logp.colwise() - lse).array().exp().matrix();
  return lse;
}

struct GmmAccum {
  double loglike = 0.0;
  double frames = 0.0;
  Eigen::VectorXd n;
  Eigen::MatrixXd fx;
  Eigen::MatrixXd fx2;                // diagonal second order
  std::vector<Eigen::MatrixXd> sxx;   // full second order

  GmmAccum(int K, int F, bool full) {
    n = Eigen::VectorXd::Zero(K);
    fx = Eigen::MatrixXd::Zero(K, F);
    if (full)
      sxx.assign(K, Eigen::MatrixXd::Zero(F, F));
    else
      fx2 = Eigen::MatrixXd::Zero(K, F);
  }

  void Add(const GmmAccum& other) {
    loglike += other.loglike;
    frames += other.frames;
    n += other.n;
    fx += other.fx;
    if (sxx.empty())
      fx2 += other.fx2;
    else
      for (std::size_t k = 0; k < sxx.size(); ++k) sxx[k] += other.sxx[k];
  }
};

void AccumulateUtterance(const GmmUbm& ubm, const Eigen::MatrixXd& frames, GmmAccum* acc) {
  if (frames.rows() == 0) return;
  Eigen::MatrixXd resp;
  const Eigen::VectorXd lse = Responsibilities(ComponentLogDensities(ubm, frames), &resp);
  acc->loglike += lse.sum();
  acc->frames += static_cast<double>(frames.rows());
  acc->n += resp.colwise().sum().transpose();
  acc->fx += resp.transpose() * frames;
  if (ubm.full_cov) {
    for (int k = 0; k < ubm.NumComponents(); ++k)
      acc->sxx[k] += frames.transpose() * resp.col(k).asDiagonal() * frames;
  } else {
    acc->fx2 += resp.transpose() * frames.array().square().matrix();
  }
}

// Deterministic parallel reduction: fixed utterance blocks accumulated
// serially inside, merged in block order.
GmmAccum AccumulateAll(const GmmUbm& ubm, const std::vector<const Eigen::MatrixXd*>& features) {
  const std::size_t block = 32;
  const std::size_t num_blocks = (features.size() + block - 1) / block;
  std::vector<GmmAccum> partial(num_blocks,
                                GmmAccum(ubm.NumComponents(), ubm.Dim(), ubm.full_cov));
  ParallelFor(num_blocks, [&](std::size_t b) {
    for (std::size_t i = b * block; i < std::min(features.size(), (b + 1) * block); ++i)
      AccumulateUtterance(ubm, *features[i], &partial[b]);
  });
  GmmAccum total(ubm.NumComponents(), ubm.Dim(), ubm.full_cov);
  for (const GmmAccum& p : partial) total.Add(p);
  return total;
}

}  // namespace

UbmTrainResult TrainUbm(const std::vector<const Eigen::MatrixXd*>& features,
                        const UbmTrainConfig& config) {
  Require(!features.empty(), "TrainUbm: no feature matrices");
  Require(config.num_components >= 1 && config.iters >= 0, "bad UBM config");
  const int K = config.num_components;
  std::size_t total_frames = 0;
  int F = -1;
  for (const Eigen::MatrixXd* f : features) {
    total_frames += f->rows();
    if (F < 0 && f->rows() > 0) F = static_cast<int>(f->cols());
  }
  Require(F > 0, "TrainUbm: all feature matrices are empty");
  Require(total_frames >= static_cast<std::size_t>(10) * K, "TrainUbm: need at least 10*K = ",
          10 * K, " frames, got ", total_frames);

  // Global moments for flooring and re-seeding.
  Eigen::VectorXd gsum = Eigen::VectorXd::Zero(F);
  Eigen::VectorXd gsq = Eigen::VectorXd::Zero(F);
  for (const Eigen::MatrixXd* f : features) {
    gsum += f->colwise().sum().transpose();
    gsq += f->array().square().colwise().sum().matrix().transpose();
  }
  const Eigen::VectorXd gmean = gsum / static_cast<double>(total_frames);
  Eigen::VectorXd gvar =
      (gsq / static_cast<double>(total_frames) - gmean.cwiseProduct(gmean)).cwiseMax(1e-20);
  const Eigen::VectorXd floor = config.floor_factor * gvar;

  // Subsample for the k-means seed.
  Rng rng(CombineSeed(config.seed, "ubm-init"));
  const std::size_t keep = std::min(config.kmeans_subsample, total_frames);
  std::vector<std::pair<std::size_t, Eigen::Index>> index;
  index.reserve(total_frames);
  for (std::size_t u = 0; u < features.size(); ++u)
    for (Eigen::Index t = 0; t < features[u]->rows(); ++t) index.emplace_back(u, t);
  for (std::size_t i = index.size(); i > 1; --i)
    std::swap(index[i - 1], index[rng.UniformInt(i)]);
  Eigen::MatrixXd sample(keep, F);
  for (std::size_t i = 0; i < keep; ++i)
    sample.row(i) = features[index[i].first]->row(index[i].second);

  // Lloyd iterations.
  Eigen::MatrixXd centers(K, F);
  for (int k = 0; k < K; ++k) centers.row(k) = sample.row(rng.UniformInt(keep));
  std::vector<int> assign(keep, 0);
  for (int iter = 0; iter < config.kmeans_iters; ++iter) {
    for (std::size_t i = 0; i < keep; ++i) {
      double best = (sample.row(i) - centers.row(0)).squaredNorm();
      int arg = 0;
      for (int k = 1; k < K; ++k) {
        const double d = (sample.row(i) - centers.row(k)).squaredNorm();
        if (d < best) {
          best = d;
          arg = k;
        }
      }
      assign[i] = arg;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, F);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    for (std::size_t i = 0; i < keep; ++i) {
      sums.row(assign[i]) += sample.row(i);
      counts[assign[i]] += 1.0;
    }
    for (int k = 0; k < K; ++k) {
      if (counts[k] > 0)
        centers.row(k) = sums.row(k) / counts[k];
      else
        centers.row(k) = sample.row(rng.UniformInt(keep));
    }
  }

  // Initial mixture from the k-means partition.
  UbmTrainResult result;
  GmmUbm& ubm = result.ubm;
  ubm.full_cov = config.full_cov;
  ubm.weights = Eigen::VectorXd::Ones(K);  // pseudo-count for tiny clusters
  ubm.means = centers;
  ubm.vars = gvar.transpose().replicate(K, 1);
  if (config.full_cov) ubm.full_covs.assign(K, gvar.asDiagonal().toDenseMatrix());
  {
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(K);
    Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(K, F);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(K, F);
    for (std::size_t i = 0; i < keep; ++i) {
      counts[assign[i]] += 1.0;
      sums.row(assign[i]) += sample.row(i);
      sq.row(assign[i]) += sample.row(i).array().square().matrix();
    }
    for (int k = 0; k < K; ++k) {
      if (counts[k] < 2) continue;
      const Eigen::VectorXd mu = sums.row(k).transpose() / counts[k];
      const Eigen::VectorXd var =
          (sq.row(k).transpose() / counts[k] - mu.cwiseProduct(mu)).cwiseMax(floor);
      ubm.vars.row(k) = var.transpose();
      if (config.full_cov) ubm.full_covs[k] = var.asDiagonal();
      ubm.weights[k] = counts[k];
    }
    ubm.weights /= ubm.weights.sum();
  }

  for (int iter = 0; iter < config.iters; ++iter) {
    const GmmAccum acc = AccumulateAll(ubm, features);
    result.log_likelihoods.push_back(acc.loglike / acc.frames);
    for (int k = 0; k < K; ++k) {
      if (acc.n[k] < 1e-8 * acc.frames) {
        Warn("TrainUbm: component ", k, " starved (n=", acc.n[k], "), re-seeding");
        ubm.means.row(k) = sample.row(rng.UniformInt(keep));
        ubm.vars.row(k) = gvar.transpose();
        if (config.full_cov) ubm.full_covs[k] = gvar.asDiagonal();
        ubm.weights[k] = 1.0 / acc.frames;
        continue;
      }
      const Eigen::VectorXd mu = acc.fx.row(k).transpose() / acc.n[k];
      ubm.weights[k] = acc.n[k] / acc.frames;
      ubm.means.row(k) = mu.transpose();
      if (config.full_cov) {
        Eigen::MatrixXd cov = acc.sxx[k] / acc.n[k] - mu * mu.transpose();
        cov = 0.5 * (cov + cov.transpose());
        for (int f = 0; f < F; ++f) cov(f, f) = std::max(cov(f, f), floor[f]);
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        while (llt.info() != Eigen::Success) {
          const double ridge = std::max(1e-10, 1e-6 * cov.trace() / F);
          Warn("TrainUbm: component ", k, " covariance not PD, adding ridge ", ridge);
          cov += ridge * Eigen::MatrixXd::Identity(F, F);
          llt.compute(cov);
        }
        ubm.full_covs[k] = cov;
        ubm.vars.row(k) = cov.diagonal().transpose();
      } else {
        const Eigen::VectorXd var =
            (acc.fx2.row(k).transpose() / acc.n[k] - mu.cwiseProduct(mu)).cwiseMax(floor);
        ubm.vars.row(k) = var.transpose();
      }
    }
    ubm.weights /= ubm.weights.sum();
  }
  return result;
}

double FrameLogLikelihood(const GmmUbm& ubm, const Eigen::VectorXd& x,
                          Eigen::VectorXd* posteriors) {
  Eigen::MatrixXd resp;
  const Eigen::VectorXd lse =
      Responsibilities(ComponentLogDensities(ubm, x.transpose()), &resp);
  if (posteriors != nullptr) *posteriors = resp.row(0).transpose();
  return lse[0];
}

BaumWelchStats ZeroStats(int num_components, int dim) {
  BaumWelchStats stats;
  stats.n = Eigen::VectorXd::Zero(num_components);
  stats.f = Eigen::MatrixXd::Zero(num_components, dim);
  return stats;
}

BaumWelchStats AccumulateStats(const GmmUbm& ubm, const Eigen::MatrixXd& features) {
  BaumWelchStats stats = ZeroStats(ubm.NumComponents(), ubm.Dim());
  if (features.rows() == 0) return stats;
  Eigen::MatrixXd resp;
  Responsibilities(ComponentLogDensities(ubm, features), &resp);
  stats.n = resp.colwise().sum().transpose();
  stats.f = resp.transpose() * features - stats.n.asDiagonal() * ubm.means;
  return stats;
}

namespace {

// Sigma_k^-1 * M for either covariance structure.
Eigen::MatrixXd SigmaInvApply(const GmmUbm& ubm, int k, const Eigen::MatrixXd& m) {
  if (ubm.full_cov) {
    Eigen::LLT<Eigen::MatrixXd> llt(ubm.full_covs[k]);
    Require(llt.info() == Eigen::Success, "UBM component ", k, " covariance not PD");
    return llt.solve(m);
  }
  return ubm.vars.row(k).transpose().array().inverse().matrix().asDiagonal() * m;
}

struct TvPosterior {
  Eigen::VectorXd w;
  Eigen::MatrixXd wwt;  // L^-1 + w w'
  double objective = 0.0;
};

TvPosterior PosteriorOfW(const GmmUbm& ubm, const TotalVariability& tv,
                         const BaumWelchStats& stats,
                         const std::vector<Eigen::MatrixXd>& sigma_inv_t, bool want_wwt) {
  const int d = tv.rank;
  Eigen::MatrixXd precision = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < ubm.NumComponents(); ++k) {
    precision += stats.n[k] * tv.blocks[k].transpose() * sigma_inv_t[k];
    a += sigma_inv_t[k].transpose() * stats.f.row(k).transpose();
  }
  precision = 0.5 * (precision + precision.transpose());
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  Require(llt.info() == Eigen::Success, "i-vector posterior precision not PD");
  TvPosterior post;
  post.w = llt.solve(a);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  post.objective = -0.5 * logdet + 0.5 * a.dot(post.w);
  if (want_wwt)
    post.wwt = llt.solve(Eigen::MatrixXd::Identity(d, d)) + post.w * post.w.transpose();
  return post;
}

}  // namespace

TotalVariability InitTv(const GmmUbm& ubm, int rank, std::uint64_t seed) {
  Require(rank >= 1, "TV rank must be >= 1");
  Require(rank <= ubm.NumComponents() * ubm.Dim(), "TV rank ", rank,
          " exceeds supervector dim ", ubm.NumComponents() * ubm.Dim());
  // 0.1x the model's own global std keeps initial loadings in scale.
  const Eigen::VectorXd ex = (ubm.weights.transpose() * ubm.means).transpose();
  Eigen::VectorXd ex2 = Eigen::VectorXd::Zero(ubm.Dim());
  for (int k = 0; k < ubm.NumComponents(); ++k)
    ex2 += ubm.weights[k] *
           (ubm.vars.row(k).transpose() + ubm.means.row(k).transpose().cwiseAbs2());
  const double scale =
      0.1 * std::sqrt(std::max(1e-20, (ex2 - ex.cwiseAbs2()).mean()));

  Rng rng(CombineSeed(seed, "tv-init"));
  TotalVariability tv;
  tv.rank = rank;
  tv.blocks.reserve(ubm.NumComponents());
  for (int k = 0; k < ubm.NumComponents(); ++k) {
    Eigen::MatrixXd block(ubm.Dim(), rank);
    for (int f = 0; f < ubm.Dim(); ++f)
      for (int r = 0; r < rank; ++r) block(f, r) = scale * rng.Gaussian();
    tv.blocks.push_back(std::move(block));
  }
  return tv;
}

TvTrainResult TrainTv(const std::vector<BaumWelchStats>& stats, const GmmUbm& ubm,
                      const TvTrainConfig& config) {
  Require(!stats.empty(), "TrainTv: no statistics");
  const int K = ubm.NumComponents();
  const int F = ubm.Dim();
  const int d = config.rank;
  for (const BaumWelchStats& s : stats)
    Require(s.n.size() == K && s.f.rows() == K && s.f.cols() == F,
            "TrainTv: stats shape mismatch");

  TvTrainResult result;
  result.tv = InitTv(ubm, d, config.seed);

  struct TvAccum {
    double objective = 0.0;
    std::vector<Eigen::MatrixXd> a;  // K of d x d
    std::vector<Eigen::MatrixXd> c;  // K of F x d
    TvAccum(int K_, int F_, int d_) {
      a.assign(K_, Eigen::MatrixXd::Zero(d_, d_));
      c.assign(K_, Eigen::MatrixXd::Zero(F_, d_));
    }
    void Add(const TvAccum& o) {
      objective += o.objective;
      for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] += o.a[k];
        c[k] += o.c[k];
      }
    }
  };

  for (int iter = 0; iter < config.iters; ++iter) {
    std::vector<Eigen::MatrixXd> sigma_inv_t(K);
    for (int k = 0; k < K; ++k) sigma_inv_t[k] = SigmaInvApply(ubm, k, result.tv.blocks[k]);

    const std::size_t block = 64;
    const std::size_t num_blocks = (stats.size() + block - 1) / block;
    std::vector<TvAccum> partial(num_blocks, TvAccum(K, F, d));
    ParallelFor(num_blocks, [&](std::size_t b) {
      for (std::size_t u = b * block; u < std::min(stats.size(), (b + 1) * block); ++u) {
        const TvPosterior post =
            PosteriorOfW(ubm, result.tv, stats[u], sigma_inv_t, true);
        partial[b].objective += post.objective;
        for (int k = 0; k < K; ++k) {
          partial[b].a[k] += stats[u].n[k] * post.wwt;
          partial[b].c[k] += stats[u].f.row(k).transpose() * post.w.transpose();
        }
      }
    });
    TvAccum acc(K, F, d);
    for (const TvAccum& p : partial) acc.Add(p);
    result.objectives.push_back(acc.objective);

    for (int k = 0; k < K; ++k) {
      // No evidence for this component leaves its loadings untouched.
      if (acc.a[k].isZero(0.0)) continue;
      Eigen::MatrixXd a_k = 0.5 * (acc.a[k] + acc.a[k].transpose());
      Eigen::LLT<Eigen::MatrixXd> llt(a_k);
      int guard = 0;
      while (llt.info() != Eigen::Success) {
        Require(++guard <= 8, "TrainTv: component ", k, " accumulator stays singular");
        const double ridge = std::max(1e-10, 1e-8 * a_k.trace() / d);
        Warn("TrainTv: component ", k, " accumulator singular, adding ridge ", ridge);
        a_k += ridge * Eigen::MatrixXd::Identity(d, d);
        llt.compute(a_k);
      }
      result.tv.blocks[k] = llt.solve(acc.c[k].transpose()).transpose();
    }
  }
  return result;
}

Eigen::VectorXd ExtractIvector(const GmmUbm& ubm, const TotalVariability& tv,
                               const BaumWelchStats& stats) {
  Require(static_cast<int>(tv.blocks.size()) == ubm.NumComponents(),
          "TV / UBM component mismatch");
  std::vector<Eigen::MatrixXd> sigma_inv_t(ubm.NumComponents());
  for (int k = 0; k < ubm.NumComponents(); ++k)
    sigma_inv_t[k] = SigmaInvApply(ubm, k, tv.blocks[k]);
  const TvPosterior post = PosteriorOfW(ubm, tv, stats, sigma_inv_t, false);
  Require(post.w.allFinite(), "i-vector is not finite");
  return post.w;
}

static const char kIvecMagic[] = "VSIV1";

void SaveIvectorModel(const std::string& path, const GmmUbm& ubm,
                      const TotalVariability& tv) {
  BinaryWriter w;
  w.PutMagic(kIvecMagic);
  w.PutU32(static_cast<std::uint32_t>(ubm.NumComponents()));
  w.PutU32(static_cast<std::uint32_t>(ubm.Dim()));
  w.PutU32(static_cast<std::uint32_t>(tv.rank));
  w.PutU32(ubm.full_cov ? 1 : 0);
  w.PutVectorF32(ubm.weights);
  w.PutMatrixF32(ubm.means);
  if (ubm.full_cov) {
    for (const auto& cov : ubm.full_covs) w.PutMatrixF32(cov);
  } else {
    w.PutMatrixF32(ubm.vars);
  }
  for (const auto& block : tv.blocks) w.PutMatrixF32(block);
  w.WriteTo(path);
}

void LoadIvectorModel(const std::string& path, GmmUbm* ubm, TotalVariability* tv) {
  BinaryReader r = BinaryReader::FromFile(path);
  r.ExpectMagic(kIvecMagic);
  const int K = static_cast<int>(r.GetU32());
  const int F = static_cast<int>(r.GetU32());
  const int d = static_cast<int>(r.GetU32());
  const bool full = r.GetU32() != 0;
  Require(K >= 1 && F >= 1 && d >= 1, "'", path, "': bad header");
  ubm->full_cov = full;
  ubm->weights = r.GetVectorF32(K);
  ubm->weights /= ubm->weights.sum();  // absorb f32 rounding
  ubm->means = r.GetMatrixF32(K, F);
  if (full) {
    ubm->full_covs.clear();
    for (int k = 0; k < K; ++k) ubm->full_covs.push_back(r.GetMatrixF32(F, F));
    ubm->vars.resize(K, F);
    for (int k = 0; k < K; ++k) ubm->vars.row(k) = ubm->full_covs[k].diagonal().transpose();
  } else {
    ubm->vars = r.GetMatrixF32(K, F);
  }
  tv->rank = d;
  tv->blocks.clear();
  for (int k = 0; k < K; ++k) tv->blocks.push_back(r.GetMatrixF32(F, d));
  Require(r.AtEnd(), "'", path, "': trailing bytes after model payload");
}

}  // namespace vectorscope
