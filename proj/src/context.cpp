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

#include "tpc/context.hpp"

#include "tpc/errors.hpp"

namespace tpc {

ContextFootprint context_footprint(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                                   const ContractParams& params, const KnnIndex& index,
                                   Eigen::Index anchor, int knn_k, int resolution) {
  if (anchor < 0 || anchor >= positions.rows())
    throw ValidationError("anchor id out of range");
  ContextFootprint fp;
  const Eigen::Vector3d x = positions.row(anchor);
  fp.self_taps = triplane_taps(x, params, resolution);
  fp.contracted_position = contract(x, params);
  for (Eigen::Index nb : index.query(anchor, knn_k))
    fp.neighbor_taps.push_back(triplane_taps(positions.row(nb), params, resolution));
  return fp;
}

void context_from_footprint(const TriPlaneGrid& grid, const ContextFootprint& fp, int knn_k,
                            Eigen::VectorXd& ctx) {
  const int block = 3 * grid.channels;
  ctx.resize(context_dim(knn_k, grid.channels));
  sample_with_taps(grid, fp.self_taps, ctx.data());
  for (int n = 0; n < knn_k; ++n) {
    double* dst = ctx.data() + (n + 1) * block;
    if (n < static_cast<int>(fp.neighbor_taps.size())) {
      sample_with_taps(grid, fp.neighbor_taps[n], dst);
    } else {
      for (int j = 0; j < block; ++j) dst[j] = 0.0;
    }
  }
  ctx.tail(3) = fp.contracted_position;
}

void context_grad_to_grid(const ContextFootprint& fp, int knn_k,
                          const Eigen::VectorXd& d_ctx, TriPlaneGrid& d_grid) {
  const int block = 3 * d_grid.channels;
  accumulate_tap_grad(fp.self_taps, d_ctx.data(), d_grid);
  const int present = std::min<int>(knn_k, static_cast<int>(fp.neighbor_taps.size()));
  for (int n = 0; n < present; ++n)
    accumulate_tap_grad(fp.neighbor_taps[n], d_ctx.data() + (n + 1) * block, d_grid);
}

Eigen::VectorXd assemble_context(const Eigen::Matrix<double, Eigen::Dynamic, 3>& positions,
                                 const TriPlaneGrid& grid, const ContractParams& params,
                                 const KnnIndex& index, Eigen::Index anchor, int knn_k) {
  const ContextFootprint fp =
      context_footprint(positions, params, index, anchor, knn_k, grid.resolution);
  Eigen::VectorXd ctx;
  context_from_footprint(grid, fp, knn_k, ctx);
  return ctx;
}

}  // namespace tpc
