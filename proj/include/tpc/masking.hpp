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
#include <vector>

#include "tpc/anchor_cloud.hpp"

namespace tpc {

// Learnable binary masks over anchors and offset slots. Forward is hard
// (0/1); the backward treats the thresholding as identity on sigmoid(logit)
// (straight-through).
struct MaskParams {
  Eigen::VectorXd anchor_logits;  // N
  Eigen::MatrixXd offset_logits;  // N x k
  double threshold = 0.5;         // epsilon_m in (0, 1)
};

// Masks start marginally on (sigmoid(0.5) ~ 0.62) so sparsity pressure can
// reach the threshold within a training run while useful slots push upward.
MaskParams make_masks(Eigen::Index anchors, int offsets_per_anchor,
                      double initial_logit = 0.5);
MaskParams zeros_like(const MaskParams& masks);

bool mask_forward(double logit, double threshold);

// Soft sparsity pressure: mean of sigmoid over all anchor and offset logits.
double mask_loss(const MaskParams& masks);
void mask_loss_grad(const MaskParams& masks, double upstream, MaskParams& grads);

struct PruneResult {
  AnchorCloud cloud;                      // survivors, masked offsets zeroed
  std::vector<Eigen::Index> index_map;    // survivor -> original anchor id
  std::vector<std::uint8_t> slot_mask;    // survivor-major, k per anchor, 1 = keep
};

// Removes anchors whose mask is 0 and zeroes masked offset slots (flagged in
// slot_mask so the encoder can skip them). Throws ValidationError when every
// anchor is masked away.
PruneResult apply_masks(const AnchorCloud& cloud, const MaskParams& masks);

}  // namespace tpc
