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

#include "tpc/trained_state.hpp"

#include "tpc/context.hpp"
#include "tpc/errors.hpp"
#include "tpc/rng.hpp"

namespace tpc {

TrainedState make_initial_state(Eigen::Index anchors, int offsets_per_anchor,
                                int resolution, int channels, int hidden_dim, int knn_k,
                                const QuantConfig& quant, std::uint64_t seed) {
  if (knn_k < 1) throw ValidationError("knn K must be >= 1");
  quant.validate();
  TrainedState state;
  state.grid = random_triplane(resolution, channels, hash_combine(seed, 1));
  state.ae = make_plane_autoencoder(channels, hash_combine(seed, 2));
  state.model = make_distribution_model(context_dim(knn_k, channels), hidden_dim,
                                        offsets_per_anchor, hash_combine(seed, 3));
  state.masks = make_masks(anchors, offsets_per_anchor);
  state.quant = quant;
  state.knn_k = knn_k;
  return state;
}

void validate_state(const TrainedState& state, Eigen::Index anchors,
                    int offsets_per_anchor) {
  if (state.grid.resolution % 8 != 0)
    throw ValidationError("tri-plane resolution must be divisible by 8");
  if (state.grid.channels != state.ae.channels)
    throw ValidationError("tri-plane and autoencoder channel counts differ");
  if (state.model.input_dim() != context_dim(state.knn_k, state.grid.channels))
    throw ValidationError("distribution model input dim does not match context layout");
  if (state.model.group_dims[2] != 3 * offsets_per_anchor)
    throw ValidationError("distribution model offsets head does not match cloud k");
  if (state.masks.anchor_logits.size() != anchors ||
      state.masks.offset_logits.rows() != anchors ||
      state.masks.offset_logits.cols() != offsets_per_anchor)
    throw ValidationError("mask shapes do not match cloud");
  state.quant.validate();
}

}  // namespace tpc
