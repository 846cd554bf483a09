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
#include <vector>

#include "tpc/contract.hpp"

namespace tpc {

// One plane is a stack of channel images; image(row, col) where row follows
// the first plane coordinate.
using PlaneImage = std::vector<Eigen::MatrixXd>;

// Three axis-aligned feature planes (xy, yz, xz), each resolution x resolution
// with `channels` channels. Also reused for latent grids at resolution R/8.
struct TriPlaneGrid {
  std::array<PlaneImage, 3> planes;
  int resolution = 0;
  int channels = 0;

  Eigen::Index value_count() const {
    return 3ll * resolution * resolution * channels;
  }
};

TriPlaneGrid make_triplane(int resolution, int channels);
TriPlaneGrid random_triplane(int resolution, int channels, std::uint64_t seed,
                             double amplitude = 1e-2);
void set_zero(TriPlaneGrid& grid);

// Bilinear footprint of one plane coordinate pair under the align-corners
// convention: continuous index = coord * (R - 1).
struct BilinearTap {
  int row0 = 0, col0 = 0;
  double frac_row = 0.0, frac_col = 0.0;
};

BilinearTap plane_tap(double a, double b, int resolution);

// Taps for all three planes of a scene point.
std::array<BilinearTap, 3> triplane_taps(const Eigen::Vector3d& x,
                                         const ContractParams& params, int resolution);

// Concatenated per-plane bilinear samples, 3C entries in plane order.
Eigen::VectorXd sample_triplane(const TriPlaneGrid& grid, const Eigen::Vector3d& x,
                                const ContractParams& params);
void sample_with_taps(const TriPlaneGrid& grid, const std::array<BilinearTap, 3>& taps,
                      double* out);

// Accumulates d(sample)/d(grid) * upstream into grad. Touches at most four
// nodes per plane.
void sample_triplane_grad(const TriPlaneGrid& grid, const Eigen::Vector3d& x,
                          const ContractParams& params, const Eigen::VectorXd& upstream,
                          TriPlaneGrid& grad);
void accumulate_tap_grad(const std::array<BilinearTap, 3>& taps, const double* upstream,
                         TriPlaneGrid& grad);

}  // namespace tpc
