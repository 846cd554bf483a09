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
#include <utility>
#include <vector>

namespace tpc {

// Multi-channel image, one matrix per channel.
using Image = std::vector<Eigen::MatrixXd>;

// Orthonormal Haar decomposition. high[level] holds the three detail
// subbands produced at that level (level 0 = finest); low is the residual
// approximation band. Perfect reconstruction and Parseval hold exactly up to
// rounding.
struct WaveletPyramid {
  struct LevelBands {
    Image detail_cols;  // low rows / high cols
    Image detail_rows;  // high rows / low cols
    Image detail_both;
  };
  Image low;
  std::vector<LevelBands> high;

  int levels() const { return static_cast<int>(high.size()); }
};

WaveletPyramid dwt2(const Image& img, int levels = 2);
Image idwt2(const WaveletPyramid& pyramid);

// Linear ramp between start and end weights over total_steps, clamped after.
struct WaveletSchedule {
  double l1_start = 1.0, l1_end = 0.2;   // low-frequency weight
  double l2_start = 0.0, l2_end = 0.8;   // high-frequency weight
  long total_steps = 1;
};

std::pair<double, double> lambda_schedule(long step, const WaveletSchedule& schedule);

// lambda1 * L1(low bands) + lambda2 * sum over levels of the mean subband L1.
double wavelet_loss(const Image& a, const Image& b, long step,
                    const WaveletSchedule& schedule);

struct WaveletLossBreakdown {
  double lambda1 = 0.0, lambda2 = 0.0;
  double low_term = 0.0, high_term = 0.0;
  double total = 0.0;
};
WaveletLossBreakdown wavelet_loss_breakdown(const Image& a, const Image& b, long step,
                                            const WaveletSchedule& schedule);

}  // namespace tpc
