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

#include "tpc/masking.hpp"

#include "tpc/distribution_model.hpp"
#include "tpc/errors.hpp"

namespace tpc {

MaskParams make_masks(Eigen::Index anchors, int offsets_per_anchor, double initial_logit) {
  MaskParams masks;
  masks.anchor_logits = Eigen::VectorXd::Constant(anchors, initial_logit);
  masks.offset_logits = Eigen::MatrixXd::Constant(anchors, offsets_per_anchor, initial_logit);
  return masks;
}

MaskParams zeros_like(const MaskParams& masks) {
  MaskParams z = masks;
  z.anchor_logits.setZero();
  z.offset_logits.setZero();
  return z;
}

bool mask_forward(double logit, double threshold) { return sigmoid(logit) > threshold; }

double mask_loss(const MaskParams& masks) {
  const Eigen::Index slots = masks.anchor_logits.size() + masks.offset_logits.size();
  if (slots == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < masks.anchor_logits.size(); ++i)
    sum += sigmoid(masks.anchor_logits(i));
  for (Eigen::Index i = 0; i < masks.offset_logits.rows(); ++i)
    for (Eigen::Index j = 0; j < masks.offset_logits.cols(); ++j)
      sum += sigmoid(masks.offset_logits(i, j));
  return sum / static_cast<double>(slots);
}

void mask_loss_grad(const MaskParams& masks, double upstream, MaskParams& grads) {
  const Eigen::Index slots = masks.anchor_logits.size() + masks.offset_logits.size();
  if (slots == 0) return;
  const double scale = upstream / static_cast<double>(slots);
  for (Eigen::Index i = 0; i < masks.anchor_logits.size(); ++i) {
    const double s = sigmoid(masks.anchor_logits(i));
    grads.anchor_logits(i) += scale * s * (1.0 - s);
  }
  for (Eigen::Index i = 0; i < masks.offset_logits.rows(); ++i)
    for (Eigen::Index j = 0; j < masks.offset_logits.cols(); ++j) {
      const double s = sigmoid(masks.offset_logits(i, j));
      grads.offset_logits(i, j) += scale * s * (1.0 - s);
    }
}

PruneResult apply_masks(const AnchorCloud& cloud, const MaskParams& masks) {
  validate_cloud(cloud);
  const Eigen::Index n = cloud.anchor_count();
  if (masks.anchor_logits.size() != n || masks.offset_logits.rows() != n ||
      masks.offset_logits.cols() != cloud.offsets_per_anchor)
    throw ValidationError("mask shapes do not match cloud");
  if (!(masks.threshold > 0.0 && masks.threshold < 1.0))
    throw ValidationError("mask threshold must lie in (0, 1)");

  PruneResult result;
  for (Eigen::Index i = 0; i < n; ++i)
    if (mask_forward(masks.anchor_logits(i), masks.threshold)) result.index_map.push_back(i);
  if (result.index_map.empty())
    throw ValidationError("anchor mask removes every anchor (empty scene)");

  const auto kept = static_cast<Eigen::Index>(result.index_map.size());
  const int k = cloud.offsets_per_anchor;
  result.cloud.offsets_per_anchor = k;
  result.cloud.positions.resize(kept, 3);
  result.cloud.features.resize(kept, kFeatureDim);
  result.cloud.scalings.resize(kept, 3);
  result.cloud.offsets.resize(kept, 3 * k);
  result.slot_mask.assign(static_cast<std::size_t>(kept) * k, 0);

  for (Eigen::Index r = 0; r < kept; ++r) {
    const Eigen::Index src = result.index_map[static_cast<std::size_t>(r)];
    result.cloud.positions.row(r) = cloud.positions.row(src);
    result.cloud.features.row(r) = cloud.features.row(src);
    result.cloud.scalings.row(r) = cloud.scalings.row(src);
    for (int slot = 0; slot < k; ++slot) {
      const bool keep = mask_forward(masks.offset_logits(src, slot), masks.threshold);
      result.slot_mask[static_cast<std::size_t>(r) * k + slot] = keep ? 1 : 0;
      for (int axis = 0; axis < 3; ++axis)
        result.cloud.offsets(r, 3 * slot + axis) =
            keep ? cloud.offsets(src, 3 * slot + axis) : 0.0;
    }
  }
  return result;
}

}  // namespace tpc
