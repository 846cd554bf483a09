// Copyright 2026 the tpc authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tpc/distribution_model.hpp"

#include <cmath>

#include "tpc/anchor_cloud.hpp"
#include "tpc/errors.hpp"
#include "tpc/normal.hpp"
#include "tpc/rng.hpp"

namespace tpc {

double softplus(double x) {
  if (x > 36.0) return x;
  if (x < -36.0) return pinned_exp(x);
  if (x > 0.0) return x + pinned_log1p(pinned_exp(-x));
  return pinned_log1p(pinned_exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = pinned_exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = pinned_exp(x);
  return e / (1.0 + e);
}

namespace {

void init_dense(Eigen::MatrixXd& w, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
  for (Eigen::Index r = 0; r < w.rows(); ++r)
    for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = bound * rng.next_symmetric();
}

// y = w x + b with a fixed accumulation order.
void dense_forward(const Eigen::MatrixXd& w, const Eigen::VectorXd& b,
                   const Eigen::VectorXd& x, Eigen::VectorXd& y) {
  y.resize(w.rows());
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    double acc = b(r);
    for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * x(c);
    y(r) = acc;
  }
}

void dense_backward(const Eigen::MatrixXd& w, const Eigen::VectorXd& x,
                    const Eigen::VectorXd& d_y, Eigen::MatrixXd& d_w, Eigen::VectorXd& d_b,
                    Eigen::VectorXd* d_x) {
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    const double g = d_y(r);
    d_b(r) += g;
    for (Eigen::Index c = 0; c < w.cols(); ++c) d_w(r, c) += g * x(c);
  }
  if (d_x != nullptr) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < w.rows(); ++r) acc += w(r, c) * d_y(r);
      (*d_x)(c) += acc;
    }
  }
}

}  // namespace

DistributionModel make_distribution_model(int input_dim, int hidden_dim,
                                          int offsets_per_anchor, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || offsets_per_anchor < 1)
    throw ValidationError("bad distribution model dimensions");
  DistributionModel model;
  model.group_dims = std::array<int, 3>{kFeatureDim, 3, 3 * offsets_per_anchor};
  model.w1.resize(hidden_dim, input_dim);
  model.b1 = Eigen::VectorXd::Zero(hidden_dim);
  model.w2.resize(hidden_dim, hidden_dim);
  model.b2 = Eigen::VectorXd::Zero(hidden_dim);
  Rng rng(hash_combine(seed, 0xD15Cull));
  init_dense(model.w1, rng);
  init_dense(model.w2, rng);
  for (int g = 0; g < 3; ++g) {
    model.head_w[g].resize(2 * model.group_dims[g], hidden_dim);
    model.head_b[g] = Eigen::VectorXd::Zero(2 * model.group_dims[g]);
    init_dense(model.head_w[g], rng);
  }
  return model;
}

DistributionModel zeros_like(const DistributionModel& model) {
  DistributionModel z = model;
  set_zero(z);
  return z;
}

void set_zero(DistributionModel& model) {
  model.w1.setZero();
  model.b1.setZero();
  model.w2.setZero();
  model.b2.setZero();
  for (int g = 0; g < 3; ++g) {
    model.head_w[g].setZero();
    model.head_b[g].setZero();
  }
}

void model_forward(const DistributionModel& model, const Eigen::VectorXd& ctx,
                   ModelCache* cache, GroupGaussians* out) {
  if (ctx.size() != model.input_dim())
    throw ValidationError("context dimension does not match distribution model input");
  ModelCache local;
  ModelCache& c = cache != nullptr ? *cache : local;
  c.ctx = ctx;
  dense_forward(model.w1, model.b1, ctx, c.h1);
  for (Eigen::Index i = 0; i < c.h1.size(); ++i) c.h1(i) = c.h1(i) > 0.0 ? c.h1(i) : 0.0;
  dense_forward(model.w2, model.b2, c.h1, c.h2);
  for (Eigen::Index i = 0; i < c.h2.size(); ++i) c.h2(i) = c.h2(i) > 0.0 ? c.h2(i) : 0.0;
  for (int g = 0; g < 3; ++g) {
    dense_forward(model.head_w[g], model.head_b[g], c.h2, c.head_raw[g]);
    const int dim = model.group_dims[g];
    out->mu[g] = c.head_raw[g].head(dim);
    out->sigma[g].resize(dim);
    for (int j = 0; j < dim; ++j)
      out->sigma[g](j) = softplus(c.head_raw[g](dim + j)) + kSigmaMin;
  }
}

GroupGaussians predict_distribution(const DistributionModel& model,
                                    const Eigen::VectorXd& ctx) {
  GroupGaussians out;
  model_forward(model, ctx, nullptr, &out);
  return out;
}

void model_backward(const DistributionModel& model, const ModelCache& cache,
                    const std::array<Eigen::VectorXd, 3>& d_mu,
                    const std::array<Eigen::VectorXd, 3>& d_sigma,
                    DistributionModel& grads, Eigen::VectorXd* d_ctx) {
  Eigen::VectorXd d_h2 = Eigen::VectorXd::Zero(model.hidden_dim());
  for (int g = 0; g < 3; ++g) {
    const int dim = model.group_dims[g];
    Eigen::VectorXd d_raw(2 * dim);
    d_raw.head(dim) = d_mu[g];
    for (int j = 0; j < dim; ++j)
      d_raw(dim + j) = d_sigma[g](j) * sigmoid(cache.head_raw[g](dim + j));
    dense_backward(model.head_w[g], cache.h2, d_raw, grads.head_w[g], grads.head_b[g],
                   &d_h2);
  }
  for (Eigen::Index i = 0; i < d_h2.size(); ++i)
    if (cache.h2(i) <= 0.0) d_h2(i) = 0.0;

  Eigen::VectorXd d_h1 = Eigen::VectorXd::Zero(model.hidden_dim());
  dense_backward(model.w2, cache.h1, d_h2, grads.w2, grads.b2, &d_h1);
  for (Eigen::Index i = 0; i < d_h1.size(); ++i)
    if (cache.h1(i) <= 0.0) d_h1(i) = 0.0;

  dense_backward(model.w1, cache.ctx, d_h1, grads.w1, grads.b1, d_ctx);
}

}  // namespace tpc
