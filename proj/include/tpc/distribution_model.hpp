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

#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>

namespace tpc {

enum class Group : int { kFeature = 0, kScaling = 1, kOffsets = 2 };
inline constexpr std::array<Group, 3> kGroups{Group::kFeature, Group::kScaling,
                                              Group::kOffsets};
inline const char* group_name(Group g) {
  switch (g) {
    case Group::kFeature: return "feature";
    case Group::kScaling: return "scaling";
    default: return "offsets";
  }
}

inline constexpr double kSigmaMin = 1e-6;

// Feedforward network mapping an assembled context vector to per-coefficient
// Gaussian parameters. Two ReLU hidden layers; one linear head per attribute
// group emitting (mu, sigma_raw) with sigma = softplus(sigma_raw) + kSigmaMin.
//
// The forward pass is written as plain index-ordered loops: the codec
// reconstructs (mu, sigma) on both encoder and decoder sides and the
// evaluation order must not depend on the linear-algebra backend.
struct DistributionModel {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // hidden x hidden
  Eigen::VectorXd b2;
  std::array<Eigen::MatrixXd, 3> head_w;  // (2 * group_dim) x hidden
  std::array<Eigen::VectorXd, 3> head_b;
  std::array<int, 3> group_dims{};  // {32, 3, 3k}

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int group_dim(Group g) const { return group_dims[static_cast<int>(g)]; }
};

DistributionModel make_distribution_model(int input_dim, int hidden_dim,
                                          int offsets_per_anchor, std::uint64_t seed);
DistributionModel zeros_like(const DistributionModel& model);
void set_zero(DistributionModel& model);

struct GroupGaussians {
  std::array<Eigen::VectorXd, 3> mu;
  std::array<Eigen::VectorXd, 3> sigma;
};

struct ModelCache {
  Eigen::VectorXd ctx;
  Eigen::VectorXd h1, h2;
  std::array<Eigen::VectorXd, 3> head_raw;
};

void model_forward(const DistributionModel& model, const Eigen::VectorXd& ctx,
                   ModelCache* cache, GroupGaussians* out);

GroupGaussians predict_distribution(const DistributionModel& model,
                                    const Eigen::VectorXd& ctx);

// Backpropagates head gradients; accumulates parameter gradients into `grads`
// and, when non-null, the context gradient into d_ctx.
void model_backward(const DistributionModel& model, const ModelCache& cache,
                    const std::array<Eigen::VectorXd, 3>& d_mu,
                    const std::array<Eigen::VectorXd, 3>& d_sigma,
                    DistributionModel& grads, Eigen::VectorXd* d_ctx);

double softplus(double x);
double sigmoid(double x);

}  // namespace tpc
