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
#include "tpc/knn.hpp"
#include "tpc/triplane.hpp"

namespace tpc {

inline int context_dim(int knn_k, int channels) { return (knn_k + 1) * 3 * channels + 3; }

// Decoder-available context of one anchor: tri-plane samples at the anchor
// and its K nearest neighbors (nearest first, zero-padded when fewer than K
// exist), followed by the contracted position. Takes positions only — the
// attributes being coded are structurally out of reach.
Eigen::VectorXd assemble_context(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                                 const TriPlaneGrid& grid, const ContractParams& params,
                                 const KnnIndex& index, Eigen::Index anchor, int knn_k);

inline Eigen::VectorXd assemble_context(const AnchorCloud& cloud, const TriPlaneGrid& grid,
                                        const ContractParams& params, const KnnIndex& index,
                                        Eigen::Index anchor, int knn_k) {
  return assemble_context(cloud.positions, grid, params, index, anchor, knn_k);
}

// Precomputed sampling footprint of one anchor: its own taps plus the taps of
// its neighbors. Positions are fixed during training, so this is computed
// once.
struct ContextFootprint {
  std::array<BilinearTap, 3> self_taps;
  std::vector<std::array<BilinearTap, 3>> neighbor_taps;  // nearest first
  Eigen::Vector3d contracted_position;
};

ContextFootprint context_footprint(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                                   const ContractParams& params, const KnnIndex& index,
                                   Eigen::Index anchor, int knn_k, int resolution);

// Fills ctx (size context_dim) from a footprint.
void context_from_footprint(const TriPlaneGrid& grid, const ContextFootprint& fp, int knn_k,
                            Eigen::VectorXd& ctx);

// Routes d(ctx) back onto grid nodes.
void context_grad_to_grid(const ContextFootprint& fp, int knn_k,
                          const Eigen::VectorXd& d_ctx, TriPlaneGrid& d_grid);

}  // namespace tpc
