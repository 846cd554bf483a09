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

#include "tpc/distribution_model.hpp"
#include "tpc/masking.hpp"
#include "tpc/plane_autoencoder.hpp"
#include "tpc/quantization.hpp"
#include "tpc/triplane.hpp"

namespace tpc {

// Everything the encoder needs after training: the fp64 master tri-plane,
// its compressor, the context model, the masks, and the quantization config.
struct TrainedState {
  TriPlaneGrid grid;
  PlaneAutoencoder ae;
  DistributionModel model;
  MaskParams masks;
  QuantConfig quant;
  int knn_k = 4;
  bool trained = false;
};

// Freshly initialized, untrained state for a cloud of the given shape.
TrainedState make_initial_state(Eigen::Index anchors, int offsets_per_anchor,
                                int resolution, int channels, int hidden_dim, int knn_k,
                                const QuantConfig& quant, std::uint64_t seed);

// Shape and finiteness checks against a cloud; throws ValidationError.
void validate_state(const TrainedState& state, Eigen::Index anchors,
                    int offsets_per_anchor);

}  // namespace tpc
