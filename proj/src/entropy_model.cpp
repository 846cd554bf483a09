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

#include "tpc/entropy_model.hpp"

#include <cmath>

#include "tpc/errors.hpp"
#include "tpc/normal.hpp"

namespace tpc {

namespace {

constexpr double kInvLn2 = 1.44269504088896338700;

}  // namespace

double bin_probability(double center, double mu, double sigma, double q) {
  sigma = sigma < kSigmaMin ? kSigmaMin : sigma;
  const double half = 0.5 * q;
  const double upper = (center + half - mu) / sigma;
  const double lower = (center - half - mu) / sigma;
  double p = normal_cdf(upper) - normal_cdf(lower);
  if (p < kProbMin) p = kProbMin;
  if (p > 1.0) p = 1.0;
  return p;
}

double coeff_probability(long long s, double mu, double sigma, double q) {
  return bin_probability(dequantize_symbol(s, q), mu, sigma, q);
}

double bits_from_probability(double p) { return -std::log2(p); }

double bin_bits(double center, double mu, double sigma, double q, BinGrad* grad) {
  sigma = sigma < kSigmaMin ? kSigmaMin : sigma;
  const double half = 0.5 * q;
  const double a = (center + half - mu) / sigma;
  const double b = (center - half - mu) / sigma;
  double p = normal_cdf(a) - normal_cdf(b);
  const bool clamped = !(p > kProbMin);
  if (clamped) p = kProbMin;
  if (p > 1.0) p = 1.0;
  if (grad != nullptr) {
    if (clamped) {
      grad->d_mu = 0.0;
      grad->d_sigma = 0.0;
    } else {
      const double phi_a = normal_pdf(a);
      const double phi_b = normal_pdf(b);
      const double dp_dmu = (phi_b - phi_a) / sigma;
      const double dp_dsigma = (b * phi_b - a * phi_a) / sigma;
      const double dbits_dp = -kInvLn2 / p;
      grad->d_mu = dbits_dp * dp_dmu;
      grad->d_sigma = dbits_dp * dp_dsigma;
    }
  }
  return -std::log2(p);
}

double entropy_loss(const AnchorCloud& cloud, const DistributionModel& model,
                    const TriPlaneGrid& grid, const ContractParams& params,
                    const KnnIndex& index, const QuantConfig& quant,
                    const NoiseSource& noise, int knn_k) {
  quant.validate();
  double total = 0.0;
  for (Eigen::Index i = 0; i < cloud.anchor_count(); ++i) {
    const Eigen::VectorXd ctx =
        assemble_context(cloud.positions, grid, params, index, i, knn_k);
    const GroupGaussians gauss = predict_distribution(model, ctx);
    for (Group g : kGroups) {
      const int gi = static_cast<int>(g);
      const double q = quant.step(g);
      for (int j = 0; j < model.group_dims[gi]; ++j) {
        double value;
        if (g == Group::kFeature)
          value = cloud.features(i, j);
        else if (g == Group::kScaling)
          value = cloud.scalings(i, j);
        else
          value = cloud.offsets(i, j);
        const double noisy = quantize_train(value, q, noise(i, g, j));
        total += bin_bits(noisy, gauss.mu[gi](j), gauss.sigma[gi](j), q);
      }
    }
  }
  return total;
}

}  // namespace tpc
