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

#include <functional>

#include "tpc/anchor_cloud.hpp"
#include "tpc/context.hpp"
#include "tpc/distribution_model.hpp"
#include "tpc/quantization.hpp"

namespace tpc {

inline constexpr double kProbMin = 1e-10;

// Probability mass the Gaussian (mu, sigma) assigns to the width-q bin
// centered on `center`, clamped below at kProbMin.
double bin_probability(double center, double mu, double sigma, double q);

// Same mass for the integer symbol s (center s*q).
double coeff_probability(long long s, double mu, double sigma, double q);

double bits_from_probability(double p);

// -log2 of the clamped bin mass. When grad is non-null, also d(bits)/d(mu)
// and d(bits)/d(sigma); both are zero in the clamped regime.
struct BinGrad {
  double d_mu = 0.0;
  double d_sigma = 0.0;
};
double bin_bits(double center, double mu, double sigma, double q, BinGrad* grad = nullptr);

// Per-coefficient noise for the training proxy, in [-0.5, 0.5].
using NoiseSource = std::function<double(Eigen::Index anchor, Group g, int dim)>;

inline NoiseSource zero_noise() {
  return [](Eigen::Index, Group, int) { return 0.0; };
}

// Total bit consumption of the cloud's attributes under the context model:
// sum over groups, anchors and dimensions of -log2 p(value + u*q) with the
// Gaussian-bin probabilities predicted from the assembled contexts.
double entropy_loss(const AnchorCloud& cloud, const DistributionModel& model,
                    const TriPlaneGrid& grid, const ContractParams& params,
                    const KnnIndex& index, const QuantConfig& quant,
                    const NoiseSource& noise, int knn_k);

}  // namespace tpc
